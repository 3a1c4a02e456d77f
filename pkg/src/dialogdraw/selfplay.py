"""Self-play harness: synthetic director and designer driven through the
dispatcher as two workers, end to end.

Deterministic for a fixed seed: layout seeds, probe coin flips, and the
stepping clock all derive from it, so two runs produce byte-identical
transcripts.
"""
from __future__ import annotations

import random

from .agents import designer_policy, director_policy
from .dialog import AWAITING_DESIGNER, COMPLETED, DESIGNER, DIRECTOR, DialogAct
from .dispatch import DispatchService, ServiceConfig, SteppingClock
from .layouts import layout_to_dict

DIRECTOR_BOT = "bot-director"
DESIGNER_BOT = "bot-designer"

ROUND_LIMIT = 50
TURN_LIMIT = 200


def run_selfplay(
    scenario: str,
    n_sessions: int,
    seed: int,
    config: ServiceConfig | None = None,
    layouts=(),
) -> tuple[list[dict], dict]:
    """Run ``n_sessions`` sessions to completion; returns (transcripts, summary).

    Sessions stuck past ``ROUND_LIMIT`` instruction rounds abort and are
    reported as correctness failures rather than silently dropped.
    ``layouts`` supplies references for coco scenarios.
    """
    cfg = config or ServiceConfig()
    clock = SteppingClock(start=1_000_000.0)
    service = DispatchService(config=cfg, clock=clock.now, rng_seed=seed, log_events=False)
    layout_rng = random.Random(seed)

    layout_ids = [service.register_layout(lay) for lay in layouts]
    palette = sorted({o.class_label for lay in layouts for o in lay.objects})

    aborted: list[str] = []
    rounds_used: dict[str, int] = {}
    bounds: dict[str, int] = {}

    for i in range(n_sessions):
        if scenario in (None, "") or scenario.startswith("2d-shape"):
            sid = service.create_session(scenario, seed=layout_rng.randrange(2**31))
        else:
            sid = service.create_session(
                scenario, layout_id=layout_ids[i % len(layout_ids)]
            )
        reference = service.get_state(sid).reference
        bounds[sid] = len(reference.objects)

        turns = 0
        while True:
            state = service.get_state(sid)
            if state.status == COMPLETED:
                break
            if state.round_count > ROUND_LIMIT or turns > TURN_LIMIT:
                aborted.append(sid)
                break
            clock.advance(1.0)
            if state.status == AWAITING_DESIGNER:
                context = service.claim_next_job(DESIGNER_BOT, DESIGNER)
                turn = designer_policy(
                    state,
                    rng_seed=seed,
                    instruction=context.get("instruction"),
                    class_lexicon=palette,
                )
                payload = {
                    "act": turn.act.value,
                    "utterance": turn.utterance,
                    "origin": turn.origin,
                }
                if turn.act is DialogAct.EDIT:
                    payload["canvas"] = layout_to_dict(turn.canvas_after)
                service.submit_job(context["job_id"], DESIGNER_BOT, payload)
            else:
                context = service.claim_next_job(DIRECTOR_BOT, DIRECTOR)
                turn = director_policy(state, rng_seed=seed)
                service.submit_job(context["job_id"], DIRECTOR_BOT, {
                    "act": turn.act.value,
                    "utterance": turn.utterance,
                    "origin": turn.origin,
                })
            turns += 1
        rounds_used[sid] = service.get_state(sid).round_count

    transcripts = service.export_completed()
    completed = [s["session_id"] for s in transcripts]
    probes = [e for e in service.events if e.kind == "probe_injected"]
    probe_results = [
        e.payload.get("probe_pass")
        for e in service.events
        if e.kind == "turn_validated" and e.payload.get("probe_pass") is not None
    ]
    summary = {
        "scenario": scenario,
        "sessions": n_sessions,
        "completed": len(completed),
        "aborted": aborted,
        "rounds": rounds_used,
        "round_bounds": bounds,
        "within_bounds": {
            sid: rounds_used[sid] <= bounds[sid] for sid in completed
        },
        "mean_rounds": (
            sum(rounds_used[sid] for sid in completed) / len(completed) if completed else 0.0
        ),
        "probes_injected": len(probes),
        "probes_passed": sum(1 for r in probe_results if r),
        "designer_worker": DESIGNER_BOT,
        "director_worker": DIRECTOR_BOT,
    }
    return transcripts, summary
