"""Evaluation harness: replay models over streams and score predictions.

Two protocols:

* SPLIT_FROZEN: update through the train portion, then predict over the
  test portion with all parameters frozen. Used with the provided splits of
  the public datasets and with ordinal splits of synthetic streams.
* ONLINE: predict-then-update over the whole stream, scoring every
  prediction; identical to concatenating the per-step predictions of
  core replay.

The sigma sweep drives both model variants over a grid of (sigma, concept
count) cohort settings, several seeds each, and averages.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import metrics
from .model import (
    ConceptId,
    EngineConfig,
    Interaction,
    ItemId,
    ItemState,
    LearnerState,
    ModelState,
    predict,
    replay,
)
from .synth import CohortSpec, simulate


class EvalMode(str, Enum):
    SPLIT_FROZEN = "split-frozen"
    ONLINE = "online"


@dataclass(frozen=True)
class EvalProtocol:
    mode: EvalMode = EvalMode.SPLIT_FROZEN
    split_fraction: float = 0.7
    repeats: int = 5
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if not (0.0 < self.split_fraction < 1.0):
            raise ValueError("split_fraction must be in (0, 1)")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "split_fraction": self.split_fraction,
            "repeats": self.repeats,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class RunMetrics:
    """Metrics of one scored run. auc is None when the labels are degenerate."""

    auc: float | None
    rmse: float
    acc: float
    n_scored: int
    n_pos: int
    n_neg: int


@dataclass
class EvalReport:
    runs: list[RunMetrics]
    config: dict
    protocol: dict
    dump_paths: list[str]

    def mean_auc(self) -> float | None:
        defined = [r.auc for r in self.runs if r.auc is not None]
        if not defined:
            return None
        return sum(defined) / len(defined)

    def mean_rmse(self) -> float:
        return sum(r.rmse for r in self.runs) / len(self.runs)

    def mean_acc(self) -> float:
        return sum(r.acc for r in self.runs) / len(self.runs)


def initial_state(
    item_tags: Mapping[ItemId, Sequence[ConceptId]] | None,
    cfg: EngineConfig,
) -> ModelState:
    """Model state with every registry item pre-registered at init rating.

    Pre-registering the union of train and test items means test-only items
    predict at the initial rating instead of failing the lookup.
    """
    state = ModelState()
    if item_tags:
        for item, tags in item_tags.items():
            state.items[item] = ItemState(
                difficulty=cfg.init_rating, tags=tuple(tags)
            )
    return state


def score_pairs(
    train: Sequence[Interaction],
    cfg: EngineConfig,
    protocol: EvalProtocol,
    test: Sequence[Interaction] | None = None,
    item_tags: Mapping[ItemId, Sequence[ConceptId]] | None = None,
) -> list[tuple[int, float, int]]:
    """(seq, score, label) triples for every scored prediction of one run."""
    state = initial_state(item_tags, cfg)
    if protocol.mode is EvalMode.ONLINE:
        if test is not None:
            raise ValueError("online mode takes a single stream")
        _, steps = replay(train, cfg, state)
        return [(s.seq, s.prediction, s.correct) for s in steps]

    if test is None:
        cut = int(len(train) * protocol.split_fraction)
        train, test = train[:cut], train[cut:]
    final, _ = replay(train, cfg, state, collect=False)
    out = []
    for rec in test:
        learner = final.learners.get(rec.student)
        if learner is None:
            learner = LearnerState(theta=cfg.init_rating)
        item = final.items.get(rec.item)
        if item is None:
            item = ItemState(difficulty=cfg.init_rating)
        out.append((rec.seq, predict(learner, item, cfg), rec.correct))
    return out


def run_metrics(
    pairs: Sequence[tuple[int, float, int]], threshold: float
) -> RunMetrics:
    scored = [(score, label) for _, score, label in pairs]
    n_pos = sum(1 for _, label in scored if label == 1)
    return RunMetrics(
        auc=metrics.auc(scored),
        rmse=metrics.rmse(scored),
        acc=metrics.acc(scored, threshold),
        n_scored=len(scored),
        n_pos=n_pos,
        n_neg=len(scored) - n_pos,
    )


def run_eval(
    train: Sequence[Interaction],
    cfg: EngineConfig,
    protocol: EvalProtocol,
    test: Sequence[Interaction] | None = None,
    item_tags: Mapping[ItemId, Sequence[ConceptId]] | None = None,
    dump_path: Path | str | None = None,
) -> EvalReport:
    """Evaluate one stream (or provided train/test pair) under a protocol."""
    pairs = score_pairs(train, cfg, protocol, test, item_tags)
    dump_paths = []
    if dump_path is not None:
        from .logio import write_prediction_dump

        write_prediction_dump(dump_path, pairs)
        dump_paths.append(str(dump_path))
    return EvalReport(
        runs=[run_metrics(pairs, protocol.threshold)],
        config=cfg.to_dict(),
        protocol=protocol.to_dict(),
        dump_paths=dump_paths,
    )


MEAN_REPEAT = "mean"


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    n_concepts: int
    variant: str
    repeat: str               # "0".."R-1" or MEAN_REPEAT
    auc: float | None
    rmse: float
    acc: float


def sigma_sweep(
    template: CohortSpec,
    sigmas: Sequence[float],
    concept_counts: Sequence[int],
    cfgs: Sequence[EngineConfig],
    protocol: EvalProtocol | None = None,
) -> list[SweepRow]:
    """Evaluate every config over a (sigma, concept count) grid.

    Per grid point, protocol.repeats cohorts are generated with seeds
    template.seed .. template.seed + repeats - 1; every config sees the same
    streams, and per-repeat rows are followed by a mean row per config.
    """
    protocol = protocol or EvalProtocol()
    rows: list[SweepRow] = []
    for l in concept_counts:
        for sigma in sigmas:
            per_cfg: dict[str, list[RunMetrics]] = {c.variant.value: [] for c in cfgs}
            for r in range(protocol.repeats):
                spec = replace(
                    template, sigma=sigma, n_concepts=l, seed=template.seed + r
                )
                truth, stream = simulate(spec)
                for cfg in cfgs:
                    pairs = score_pairs(
                        stream, cfg, protocol, item_tags=truth.tags
                    )
                    m = run_metrics(pairs, protocol.threshold)
                    per_cfg[cfg.variant.value].append(m)
                    rows.append(
                        SweepRow(sigma, l, cfg.variant.value, str(r),
                                 m.auc, m.rmse, m.acc)
                    )
            for cfg in cfgs:
                runs = per_cfg[cfg.variant.value]
                defined = [m.auc for m in runs if m.auc is not None]
                rows.append(
                    SweepRow(
                        sigma, l, cfg.variant.value, MEAN_REPEAT,
                        sum(defined) / len(defined) if defined else None,
                        sum(m.rmse for m in runs) / len(runs),
                        sum(m.acc for m in runs) / len(runs),
                    )
                )
    return rows


def sweep_to_csv(rows: Iterable[SweepRow], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sigma", "n_concepts", "variant", "repeat", "auc", "rmse", "acc"])
        for row in rows:
            writer.writerow([
                repr(row.sigma), row.n_concepts, row.variant, row.repeat,
                "" if row.auc is None else repr(row.auc),
                repr(row.rmse), repr(row.acc),
            ])


def crossover_sigma(rows: Sequence[SweepRow], n_concepts: int) -> float:
    """Smallest grid sigma where mean M-Elo AUC exceeds mean Elo AUC.

    Returns +inf when M-Elo never overtakes on the grid.
    """
    means: dict[tuple[float, str], float | None] = {}
    for row in rows:
        if row.repeat == MEAN_REPEAT and row.n_concepts == n_concepts:
            means[(row.sigma, row.variant)] = row.auc
    sigmas = sorted({s for s, _ in means})
    for sigma in sigmas:
        melo_auc = means.get((sigma, "melo"))
        elo_auc = means.get((sigma, "elo"))
        if melo_auc is not None and elo_auc is not None and melo_auc > elo_auc:
            return sigma
    return float("inf")
