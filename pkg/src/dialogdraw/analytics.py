"""Offline measurements over exported transcripts.

All functions are pure over the transcript set (session dicts in the
export format); shuffling session order changes nothing.  Rounds count
director instruction turns, and word dispersion is the population
standard deviation over instructions; both conventions are echoed in the
output metadata so downstream readers need not guess.
"""
from __future__ import annotations

import statistics
from collections import Counter

from .dialog import DESIGNER, DIRECTOR, DialogAct
from .layouts import KIND_SHAPE2D
from .nlp import extract_mentions, normalize

_INSTRUCTION_ACTS = (DialogAct.INSTRUCT.value, DialogAct.SUGGEST_FIX.value)


def _instruction_turns(session: dict) -> list[dict]:
    return [
        t for t in session["turns"]
        if t["role"] == DIRECTOR and t["act"] in _INSTRUCTION_ACTS
    ]


def _word_count(utterance: str) -> int:
    return len([t for t in normalize(utterance) if t != "?"])


def duration_stats(transcripts) -> dict:
    """Per-scenario mean rounds and mean/std words per instruction."""
    transcripts = list(transcripts)
    if not transcripts:
        raise ValueError("duration_stats needs at least one transcript")
    by_scenario: dict[str, dict] = {}
    for session in transcripts:
        bucket = by_scenario.setdefault(
            session["scenario"], {"rounds": [], "word_counts": []}
        )
        instructions = _instruction_turns(session)
        bucket["rounds"].append(len(instructions))
        bucket["word_counts"].extend(_word_count(t["utterance"]) for t in instructions)

    scenarios = {}
    for scenario, bucket in sorted(by_scenario.items()):
        words = bucket["word_counts"]
        scenarios[scenario] = {
            "sessions": len(bucket["rounds"]),
            "mean_rounds": statistics.fmean(bucket["rounds"]),
            "instructions": len(words),
            "mean_words": statistics.fmean(words) if words else 0.0,
            "std_words": statistics.pstdev(words) if words else 0.0,
        }
    return {
        "metadata": {
            "rounds": "director INSTRUCT/SUGGEST_FIX turns per session",
            "words": "tokens per instruction; dispersion is population std over instructions",
        },
        "scenarios": scenarios,
    }


def word_usage(transcripts) -> dict:
    """Fractions of instructions mentioning a location, color, or shape."""
    transcripts = list(transcripts)
    for session in transcripts:
        if session.get("kind", KIND_SHAPE2D) != KIND_SHAPE2D:
            raise ValueError("word_usage is defined over shape2d transcripts")
    instructions = [t for s in transcripts for t in _instruction_turns(s)]
    if not instructions:
        raise ValueError("word_usage needs at least one instruction")
    hits = Counter()
    for turn in instructions:
        mentions = extract_mentions(normalize(turn["utterance"]), KIND_SHAPE2D)
        hits["location"] += bool(mentions.locations)
        hits["color"] += bool(mentions.colors)
        hits["shape"] += bool(mentions.shapes)
    n = len(instructions)
    return {
        "instructions": n,
        "location": hits["location"] / n,
        "color": hits["color"] / n,
        "shape": hits["shape"] / n,
    }


def _objects_touched(turn: dict, kind: str) -> int:
    touched = set()
    for e in turn["edits"]:
        if kind == KIND_SHAPE2D:
            if e["op"] == "add":
                touched.add(("cell", e["object"]["row"], e["object"]["col"]))
            elif e["op"] == "move":
                touched.add(("cell", e["dest"][0], e["dest"][1]))
            else:
                touched.add(("cell", e["cell"][0], e["cell"][1]))
        else:
            if e["op"] == "add":
                touched.add(("id", e["object"]["id"]))
            else:
                touched.add(("id", e["id"]))
    return len(touched)


def instruction_efficiency(transcripts) -> dict:
    """Histogram of distinct objects modified per designer EDIT turn."""
    transcripts = list(transcripts)
    histogram: Counter = Counter()
    turns = 0
    for session in transcripts:
        kind = session.get("kind", KIND_SHAPE2D)
        for turn in session["turns"]:
            if turn["role"] != DESIGNER or turn["act"] != DialogAct.EDIT.value:
                continue
            turns += 1
            histogram[_objects_touched(turn, kind)] += 1
    over_three = sum(count for n, count in histogram.items() if n > 3)
    return {
        "edit_turns": turns,
        "histogram": {str(k): v for k, v in sorted(histogram.items())},
        "p_gt3": (over_three / turns) if turns else 0.0,
    }
