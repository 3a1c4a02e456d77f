"""Command line: transcript statistics, self-play runs, and the API server."""
from __future__ import annotations

import json
import os

import click

from .analytics import duration_stats, instruction_efficiency, word_usage
from .dispatch import DispatchService, ServiceConfig
from .selfplay import run_selfplay


def _load_transcripts(path: str) -> list[dict]:
    sessions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                sessions.append(json.loads(line))
    return sessions


@click.group()
def main():
    """Dialog-driven canvas reconstruction toolkit."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Export file, one session JSON object per line.")
@click.option("--scenario", default=None, help="Restrict to one scenario.")
@click.option("--json", "json_out", default=None, type=click.Path(),
              help="Also write the full report as JSON.")
def stats(input_path, scenario, json_out):
    """Duration, word-usage, and efficiency statistics over an export."""
    sessions = _load_transcripts(input_path)
    if scenario:
        sessions = [s for s in sessions if s["scenario"] == scenario]
    if not sessions:
        raise click.ClickException("no sessions matched")

    report = {"duration": duration_stats(sessions)}
    shape_sessions = [s for s in sessions if s.get("kind") == "shape2d"]
    if shape_sessions:
        report["word_usage"] = word_usage(shape_sessions)
    report["efficiency"] = instruction_efficiency(sessions)

    click.echo(f"{'scenario':<20} {'sessions':>8} {'rounds':>8} {'words':>14}")
    for name, row in report["duration"]["scenarios"].items():
        words = f"{row['mean_words']:.1f} +/- {row['std_words']:.1f}"
        click.echo(f"{name:<20} {row['sessions']:>8} {row['mean_rounds']:>8.2f} {words:>14}")
    if "word_usage" in report:
        wu = report["word_usage"]
        click.echo(
            f"instruction mentions: location {wu['location']:.2f}"
            f" color {wu['color']:.2f} shape {wu['shape']:.2f}"
        )
    eff = report["efficiency"]
    click.echo(f"edit turns {eff['edit_turns']}, P(objects>3) = {eff['p_gt3']:.2f}")

    if json_out:
        with open(json_out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        click.echo(f"report written to {json_out}")


@main.command()
@click.option("--scenario", default="2d-shape-random", show_default=True)
@click.option("--n", "n_sessions", default=100, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path(),
              help="Directory for export.jsonl and summary.json.")
@click.option("--coco-annotations", default=None, type=click.Path(exists=True),
              help="Annotation file providing references for coco scenarios.")
def selfplay(scenario, n_sessions, seed, out_dir, coco_annotations):
    """Drive synthetic workers through the dispatcher end to end."""
    layouts = []
    if coco_annotations:
        from .coco import ingest_coco_annotations

        with open(coco_annotations, encoding="utf-8") as fh:
            layouts = ingest_coco_annotations(fh.read(), scenario)
        if not layouts:
            raise click.ClickException("annotation file yields no layouts for this scenario")
    transcripts, summary = run_selfplay(scenario, n_sessions, seed, layouts=layouts)
    click.echo(
        f"{summary['completed']}/{summary['sessions']} sessions completed,"
        f" mean rounds {summary['mean_rounds']:.2f},"
        f" probes {summary['probes_passed']}/{summary['probes_injected']} passed"
    )
    if summary["aborted"]:
        click.echo(f"ABORTED (correctness failure): {summary['aborted']}")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        export_path = os.path.join(out_dir, "export.jsonl")
        with open(export_path, "w", encoding="utf-8") as fh:
            for session in transcripts:
                fh.write(json.dumps(session, sort_keys=True) + "\n")
        with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
        click.echo(f"transcripts written to {export_path}")


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="JSON config: lease_minutes, probe_probability, "
                   "probe_max_per_session, port, data_dir.")
@click.option("--coco-simple", default=None, type=click.Path(exists=True))
@click.option("--coco-complex", default=None, type=click.Path(exists=True))
def serve(config_path, coco_simple, coco_complex):
    """Run the HTTP dispatcher."""
    import uvicorn

    from .api import build_app

    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig()
    service = DispatchService(config=config)
    for path, scenario in ((coco_simple, "coco-simple"), (coco_complex, "coco-complex")):
        if path:
            with open(path, encoding="utf-8") as fh:
                ids = service.ingest_annotations(fh.read(), scenario)
            click.echo(f"registered {len(ids)} {scenario} layouts from {path}")
    uvicorn.run(build_app(service), host="0.0.0.0", port=config.port)


if __name__ == "__main__":
    main()
