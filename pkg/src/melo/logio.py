"""File formats shared across the pipeline.

* interaction log: UTF-8 TSV, header ``seq student item correct timestamp``,
  one interaction per line, empty timestamp field when absent.
* item registry: JSON object mapping item id -> list of concept tags.
* ground truth sidecar: JSON dump of a GroundTruth.
* prediction dump: CSV ``seq,score,label`` for external analysis.

Writers emit deterministic bytes (sorted keys, repr-formatted floats) so
identical runs produce identical artifacts.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import ConceptId, Interaction, ItemId, StreamError
from .synth import GroundTruth

LOG_HEADER = "seq\tstudent\titem\tcorrect\ttimestamp"


def write_interactions(path: Path | str, interactions: Iterable[Interaction]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(LOG_HEADER + "\n")
        for rec in interactions:
            ts = rec.timestamp or ""
            fh.write(f"{rec.seq}\t{rec.student}\t{rec.item}\t{rec.correct}\t{ts}\n")


def read_interactions(path: Path | str) -> list[Interaction]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != LOG_HEADER:
            raise StreamError(f"unexpected interaction log header: {header!r}")
        for position, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) not in (4, 5):
                raise StreamError(f"expected 4 or 5 fields, got {len(parts)}", position)
            seq_s, student, item, correct_s = parts[:4]
            ts = parts[4] if len(parts) == 5 and parts[4] else None
            try:
                seq = int(seq_s)
                correct = int(correct_s)
            except ValueError:
                raise StreamError(f"non-integer seq/correct in {line!r}", position) from None
            if correct not in (0, 1):
                raise StreamError(f"correctness must be 0 or 1, got {correct}", position)
            out.append(Interaction(student, item, correct, seq, ts))
    return out


def write_item_registry(
    path: Path | str, tags: Mapping[ItemId, Sequence[ConceptId]]
) -> None:
    payload = {item: list(t) for item, t in tags.items()}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_item_registry(path: Path | str) -> dict[ItemId, tuple[ConceptId, ...]]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return {item: tuple(t) for item, t in payload.items()}


def write_ground_truth(path: Path | str, truth: GroundTruth) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(truth.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def read_ground_truth(path: Path | str) -> GroundTruth:
    with open(path, "r", encoding="utf-8") as fh:
        return GroundTruth.from_dict(json.load(fh))


def write_prediction_dump(
    path: Path | str, rows: Iterable[tuple[int, float, int]]
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("seq,score,label\n")
        for seq, score, label in rows:
            fh.write(f"{seq},{score!r},{label}\n")
