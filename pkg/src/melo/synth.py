"""Synthetic cohort and interaction-stream generation.

Students get a true per-concept knowledge vector drawn from a normal
distribution whose mean is itself uniform per student; items get concept
tags (discrete-uniform tag count, tags without replacement), a difficulty
and a discrimination. Responses follow a 2PL IRT model over the mean true
knowledge on the item's tags.

All sampling uses numpy's PCG64 generator so that a (spec, seed) pair
reproduces byte-identical output. Draw order within generate_cohort:
student means, knowledge matrix, tag counts, per-item tags in item order,
difficulties, discriminations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ConceptId, DomainError, Interaction, ItemId, StudentId, logistic

# Interaction sampling inside simulate() reuses spec.seed offset by this, so
# one seed drives both the cohort and its stream without sharing a generator.
STREAM_SEED_OFFSET = 1_000_003


@dataclass(frozen=True)
class CohortSpec:
    """Generation parameters for one synthetic cohort."""

    n_students: int = 100
    n_items: int = 1000
    n_answers: int = 70_000
    n_concepts: int = 10
    sigma: float = 1.0
    tag_range: tuple[int, int] = (1, 3)
    mean_range: tuple[float, float] = (-1.0, 1.0)
    difficulty_dist: tuple[float, float] = (0.0, 1.0)
    discrimination_dist: tuple[float, float] = (1.0, 0.3)
    min_discrimination: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_students", "n_items", "n_answers", "n_concepts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        lo, hi = self.tag_range
        if not (1 <= lo <= hi <= self.n_concepts):
            raise ValueError(
                f"tag_range {self.tag_range} must lie within [1, {self.n_concepts}]"
            )
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.mean_range[0] > self.mean_range[1]:
            raise ValueError("mean_range must be (low, high)")
        if self.min_discrimination <= 0:
            raise ValueError("min_discrimination must be > 0")

    def to_dict(self) -> dict:
        return {
            "n_students": self.n_students,
            "n_items": self.n_items,
            "n_answers": self.n_answers,
            "n_concepts": self.n_concepts,
            "sigma": self.sigma,
            "tag_range": list(self.tag_range),
            "mean_range": list(self.mean_range),
            "difficulty_dist": list(self.difficulty_dist),
            "discrimination_dist": list(self.discrimination_dist),
            "min_discrimination": self.min_discrimination,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CohortSpec":
        kwargs = dict(data)
        for name in ("tag_range", "mean_range", "difficulty_dist", "discrimination_dist"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


@dataclass(eq=False)
class GroundTruth:
    """True knowledge states and item parameters behind a synthetic cohort."""

    spec: CohortSpec
    concepts: tuple[ConceptId, ...]
    students: tuple[StudentId, ...]
    items: tuple[ItemId, ...]
    knowledge: np.ndarray        # (n_students, n_concepts)
    tags: dict[ItemId, tuple[ConceptId, ...]]
    difficulty: np.ndarray       # (n_items,)
    discrimination: np.ndarray   # (n_items,)

    def __post_init__(self) -> None:
        self._student_index = {s: i for i, s in enumerate(self.students)}
        self._item_index = {q: i for i, q in enumerate(self.items)}
        self._concept_index = {c: i for i, c in enumerate(self.concepts)}

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "concepts": list(self.concepts),
            "students": list(self.students),
            "items": list(self.items),
            "knowledge": self.knowledge.tolist(),
            "tags": {q: list(t) for q, t in self.tags.items()},
            "difficulty": self.difficulty.tolist(),
            "discrimination": self.discrimination.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruth":
        return cls(
            spec=CohortSpec.from_dict(data["spec"]),
            concepts=tuple(data["concepts"]),
            students=tuple(data["students"]),
            items=tuple(data["items"]),
            knowledge=np.asarray(data["knowledge"], dtype=float),
            tags={q: tuple(t) for q, t in data["tags"].items()},
            difficulty=np.asarray(data["difficulty"], dtype=float),
            discrimination=np.asarray(data["discrimination"], dtype=float),
        )


def generate_cohort(spec: CohortSpec) -> GroundTruth:
    """Draw students, items and their true parameters for one cohort."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, m, l = spec.n_students, spec.n_items, spec.n_concepts

    means = rng.uniform(spec.mean_range[0], spec.mean_range[1], size=n)
    knowledge = rng.normal(loc=means[:, None], scale=spec.sigma, size=(n, l))

    lo, hi = spec.tag_range
    tag_counts = rng.integers(lo, hi + 1, size=m)
    concepts = tuple(f"c{i + 1}" for i in range(l))
    items = tuple(f"q{i + 1}" for i in range(m))
    tags = {}
    for idx, q in enumerate(items):
        chosen = rng.choice(l, size=int(tag_counts[idx]), replace=False)
        tags[q] = tuple(concepts[c] for c in sorted(chosen))

    difficulty = rng.normal(spec.difficulty_dist[0], spec.difficulty_dist[1], size=m)
    discrimination = np.maximum(
        rng.normal(spec.discrimination_dist[0], spec.discrimination_dist[1], size=m),
        spec.min_discrimination,
    )
    return GroundTruth(
        spec=spec,
        concepts=concepts,
        students=tuple(f"s{i + 1}" for i in range(n)),
        items=items,
        knowledge=knowledge,
        tags=tags,
        difficulty=difficulty,
        discrimination=discrimination,
    )


def irt_response_prob(truth: GroundTruth, student: StudentId, item: ItemId) -> float:
    """2PL success probability 1 / (1 + e^(-a (theta_bar - b))).

    theta_bar is the student's mean true knowledge over the item's tags.
    """
    n = truth._student_index[student]
    m = truth._item_index[item]
    tag_idx = [truth._concept_index[c] for c in truth.tags[truth.items[m]]]
    if not tag_idx:
        raise DomainError(f"item {item} has no tags")
    theta_bar = float(truth.knowledge[n, tag_idx].mean())
    return logistic(truth.discrimination[m] * (theta_bar - truth.difficulty[m]))


def response_probabilities(truth: GroundTruth) -> np.ndarray:
    """Matrix of 2PL success probabilities for every (student, item) pair."""
    n, l = truth.knowledge.shape
    m = len(truth.items)
    weights = np.zeros((m, l))
    for idx, q in enumerate(truth.items):
        cols = [truth._concept_index[c] for c in truth.tags[q]]
        weights[idx, cols] = 1.0 / len(cols)
    theta_bar = truth.knowledge @ weights.T                      # (n, m)
    z = truth.discrimination[None, :] * (theta_bar - truth.difficulty[None, :])
    out = np.empty_like(z)
    np.exp(-np.abs(z), out=out)
    out = np.where(z >= 0, 1.0 / (1.0 + out), out / (1.0 + out))
    return out


def sample_interactions(truth: GroundTruth, r: int, seed: int) -> list[Interaction]:
    """Sample r (student, item) pairs uniformly with replacement and draw
    Bernoulli outcomes from the 2PL probabilities. seq runs 1..r."""
    if r < 1:
        raise ValueError("need at least one interaction")
    rng = np.random.Generator(np.random.PCG64(seed))
    n, m = len(truth.students), len(truth.items)
    probs = response_probabilities(truth)
    student_idx = rng.integers(0, n, size=r)
    item_idx = rng.integers(0, m, size=r)
    correct = (rng.random(r) < probs[student_idx, item_idx]).astype(int)
    return [
        Interaction(
            student=truth.students[student_idx[i]],
            item=truth.items[item_idx[i]],
            correct=int(correct[i]),
            seq=i + 1,
        )
        for i in range(r)
    ]


def simulate(spec: CohortSpec) -> tuple[GroundTruth, list[Interaction]]:
    """Generate a cohort and its interaction stream from a single seed."""
    truth = generate_cohort(spec)
    stream = sample_interactions(truth, spec.n_answers, spec.seed + STREAM_SEED_OFFSET)
    return truth, stream
