"""Rating state and update rules for the Elo and M-Elo learner models.

Two model variants over an ordered stream of (student, item, correct)
interactions:

* standard Elo: one global rating per student, one difficulty per item.
* M-Elo: one rating per (student, concept) plus a global item difficulty,
  supporting items tagged with several concepts at once.

All update functions are deterministic state transitions. They mutate the
states passed in (callers that need purity copy first; ``replay`` does).

Note on the M-Elo normalisation factor: the per-concept student updates are
scaled by ``alpha = |a - P_bar| / sum_l |a - P_l|`` over the item's tagged
concepts. With the concept weights folded inside the absolute values the
updates would not cancel against the item update, so the weights act as
membership indicators here; this is the unique reading under which the
constant-K updates sum to zero and single-concept items reduce exactly to
standard Elo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

StudentId = str
ItemId = str
ConceptId = str


class MeloError(Exception):
    """Base class for model errors."""


class ConfigError(MeloError):
    """Invalid or inconsistent engine configuration."""


class DomainError(MeloError):
    """Operation not defined for this state (e.g. item with no tags)."""


class StreamError(MeloError):
    """Malformed interaction record; carries the stream position."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"record {position}: {message}"
        super().__init__(message)
        self.position = position


class Variant(str, Enum):
    STANDARD_ELO = "elo"
    M_ELO = "melo"


@dataclass(frozen=True)
class EngineConfig:
    """Model variant plus sensitivity settings.

    Exactly one sensitivity mode is active: constant ``k`` when given,
    otherwise the decaying uncertainty function ``gamma / (1 + beta * n)``
    evaluated per parameter on its own prior-update count.
    """

    variant: Variant = Variant.M_ELO
    k: float | None = None
    gamma: float = 1.8
    beta: float = 0.05
    guess_correction: bool = False
    init_rating: float = 0.0

    def __post_init__(self) -> None:
        if self.k is not None and self.k <= 0:
            raise ConfigError(f"constant K must be > 0, got {self.k}")
        if self.k is None:
            if self.gamma <= 0:
                raise ConfigError(f"gamma must be > 0, got {self.gamma}")
            if self.beta < 0:
                raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if not math.isfinite(self.init_rating):
            raise ConfigError("init_rating must be finite")

    def sensitivity(self, n: int) -> float:
        """Step size for a parameter that has seen ``n`` prior updates."""
        if self.k is not None:
            return self.k
        return uncertainty(n, self.gamma, self.beta)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "k": self.k,
            "gamma": self.gamma,
            "beta": self.beta,
            "guess_correction": self.guess_correction,
            "init_rating": self.init_rating,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "EngineConfig":
        known = {"variant", "k", "gamma", "beta", "guess_correction", "init_rating"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "variant" in kwargs:
            try:
                kwargs["variant"] = Variant(kwargs["variant"])
            except ValueError:
                raise ConfigError(f"unknown variant {kwargs['variant']!r}") from None
        return cls(**kwargs)


@dataclass(frozen=True)
class DomainModel:
    """Ordered set of the course's concepts."""

    concepts: tuple[ConceptId, ...]

    def __post_init__(self) -> None:
        if len(self.concepts) < 1:
            raise DomainError("domain model needs at least one concept")
        if len(set(self.concepts)) != len(self.concepts):
            raise DomainError("duplicate concept ids in domain model")

    def __len__(self) -> int:
        return len(self.concepts)

    def __contains__(self, concept: ConceptId) -> bool:
        return concept in self.concepts


def concept_weights(tags: Sequence[ConceptId]) -> dict[ConceptId, float]:
    """Uniform per-concept weights 1/g for an item tagged with g concepts."""
    if not tags:
        raise DomainError("item has no tagged concepts")
    if len(set(tags)) != len(tags):
        raise DomainError(f"duplicate tags: {list(tags)}")
    w = 1.0 / len(tags)
    return {c: w for c in tags}


@dataclass
class ItemState:
    """Difficulty rating, attempt counter and concept tags of one item.

    ``options`` is the multiple-choice option count used by the guess
    correction; absent means no correction is possible for this item.
    """

    difficulty: float = 0.0
    attempts: int = 0
    tags: tuple[ConceptId, ...] = ()
    options: int | None = None

    def __post_init__(self) -> None:
        self.tags = tuple(self.tags)
        if len(set(self.tags)) != len(self.tags):
            raise DomainError(f"duplicate tags: {list(self.tags)}")
        if self.options is not None and self.options < 2:
            raise ConfigError(f"option count must be >= 2, got {self.options}")

    @property
    def weights(self) -> dict[ConceptId, float]:
        return concept_weights(self.tags)

    def copy(self) -> "ItemState":
        return ItemState(self.difficulty, self.attempts, self.tags, self.options)


@dataclass
class ConceptRating:
    rating: float = 0.0
    attempts: int = 0

    def copy(self) -> "ConceptRating":
        return ConceptRating(self.rating, self.attempts)


@dataclass
class LearnerState:
    """Global rating (standard Elo) and per-concept ratings (M-Elo).

    Concepts absent from ``concepts`` are semantically at the initial
    rating with zero attempts.
    """

    theta: float = 0.0
    theta_attempts: int = 0
    concepts: dict[ConceptId, ConceptRating] = field(default_factory=dict)

    def concept_rating(self, concept: ConceptId, init: float = 0.0) -> float:
        entry = self.concepts.get(concept)
        return entry.rating if entry is not None else init

    def concept_attempts(self, concept: ConceptId) -> int:
        entry = self.concepts.get(concept)
        return entry.attempts if entry is not None else 0

    def copy(self) -> "LearnerState":
        return LearnerState(
            self.theta,
            self.theta_attempts,
            {c: e.copy() for c, e in self.concepts.items()},
        )


@dataclass(frozen=True)
class Interaction:
    """One attempt record; the unit of the ordered stream."""

    student: StudentId
    item: ItemId
    correct: int
    seq: int
    timestamp: str | None = None

    def __post_init__(self) -> None:
        if self.correct not in (0, 1):
            raise StreamError(f"correctness must be 0 or 1, got {self.correct!r}")


@dataclass(frozen=True)
class UpdateDelta:
    """Audit trail of one update: exactly the parameters the variant touched.

    ``theta_delta`` is set for standard Elo, ``concept_deltas`` for M-Elo.
    ``probability_used`` is the pre-update success prediction that fed the
    update formulas (guess-corrected when the correction is active).
    """

    item_delta: float
    theta_delta: float | None
    concept_deltas: Mapping[ConceptId, float]
    probability_used: float

    def student_delta_sum(self) -> float:
        total = self.theta_delta if self.theta_delta is not None else 0.0
        return total + sum(self.concept_deltas.values())


@dataclass
class ModelState:
    """All learner and item states of one course or one evaluation run."""

    learners: dict[StudentId, LearnerState] = field(default_factory=dict)
    items: dict[ItemId, ItemState] = field(default_factory=dict)

    def copy(self) -> "ModelState":
        return ModelState(
            {s: st.copy() for s, st in self.learners.items()},
            {i: st.copy() for i, st in self.items.items()},
        )


@dataclass(frozen=True)
class StepResult:
    """Prediction-before-update plus the applied delta for one interaction."""

    seq: int
    student: StudentId
    item: ItemId
    correct: int
    prediction: float
    delta: UpdateDelta


def logistic(x: float) -> float:
    """Standard logistic 1 / (1 + e^-x), numerically stable on both tails."""
    if not math.isfinite(x):
        raise ValueError(f"logistic argument must be finite, got {x!r}")
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def uncertainty(n: int, gamma: float, beta: float) -> float:
    """Decaying sensitivity gamma / (1 + beta * n) after n prior updates."""
    if n < 0:
        raise ValueError(f"update count must be >= 0, got {n}")
    return gamma / (1.0 + beta * n)


def _guess_corrected(p: float, item: ItemState, cfg: EngineConfig) -> float:
    if not cfg.guess_correction:
        return p
    if item.options is None:
        raise ConfigError("guess correction enabled but item has no option count")
    floor = 1.0 / item.options
    return floor + (1.0 - floor) * p


def predict_standard(learner: LearnerState, item: ItemState, cfg: EngineConfig) -> float:
    """Success probability under standard Elo: sigma(theta - d)."""
    if cfg.variant is not Variant.STANDARD_ELO:
        raise ConfigError(f"predict_standard called with variant {cfg.variant.value}")
    return _guess_corrected(logistic(learner.theta - item.difficulty), item, cfg)


def average_competency(learner: LearnerState, item: ItemState, init: float = 0.0) -> float:
    """Weighted mean of the learner's ratings over the item's tagged concepts.

    Weights are 1/g, so this is the arithmetic mean of the tagged ratings;
    concepts the learner has never touched contribute ``init``.
    """
    weights = item.weights
    return sum(learner.concept_rating(c, init) * w for c, w in weights.items())


def predict_melo(learner: LearnerState, item: ItemState, cfg: EngineConfig) -> float:
    """Success probability under M-Elo: sigma(mean tagged rating - d)."""
    if cfg.variant is not Variant.M_ELO:
        raise ConfigError(f"predict_melo called with variant {cfg.variant.value}")
    lam_bar = average_competency(learner, item, cfg.init_rating)
    return _guess_corrected(logistic(lam_bar - item.difficulty), item, cfg)


def _per_concept_probabilities(
    learner: LearnerState, item: ItemState, cfg: EngineConfig
) -> dict[ConceptId, float]:
    probs = {}
    for concept in item.tags:
        p = logistic(learner.concept_rating(concept, cfg.init_rating) - item.difficulty)
        probs[concept] = _guess_corrected(p, item, cfg)
    return probs


def melo_alpha(learner: LearnerState, item: ItemState, a: int, cfg: EngineConfig) -> float:
    """Normalisation factor keeping the M-Elo update zero-sum.

    ``|a - P_bar| / sum over tagged concepts of |a - P_l|`` with all
    probabilities taken from the pre-update state. For a single-concept
    item this is exactly 1.
    """
    p_bar = predict_melo(learner, item, cfg)
    per_concept = _per_concept_probabilities(learner, item, cfg)
    denom = sum(abs(a - p) for p in per_concept.values())
    if denom <= 0.0:
        raise MeloError("internal: zero normalisation denominator")
    return abs(a - p_bar) / denom


def update_standard(
    learner: LearnerState, item: ItemState, a: int, cfg: EngineConfig
) -> UpdateDelta:
    """Apply one standard Elo update in place and return the applied deltas."""
    if a not in (0, 1):
        raise StreamError(f"correctness must be 0 or 1, got {a!r}")
    p = predict_standard(learner, item, cfg)
    k_student = cfg.sensitivity(learner.theta_attempts)
    k_item = cfg.sensitivity(item.attempts)
    theta_delta = k_student * (a - p)
    item_delta = k_item * (p - a)
    learner.theta += theta_delta
    learner.theta_attempts += 1
    item.difficulty += item_delta
    item.attempts += 1
    return UpdateDelta(item_delta, theta_delta, {}, p)


def update_melo(
    learner: LearnerState, item: ItemState, a: int, cfg: EngineConfig
) -> UpdateDelta:
    """Apply one M-Elo update in place and return the applied deltas.

    The item moves by K * (P_bar - a); every tagged concept moves by
    alpha * K * (a - P_l), each K drawn from that parameter's own attempt
    counter in uncertainty mode.
    """
    if a not in (0, 1):
        raise StreamError(f"correctness must be 0 or 1, got {a!r}")
    p_bar = predict_melo(learner, item, cfg)
    per_concept = _per_concept_probabilities(learner, item, cfg)
    denom = sum(abs(a - p) for p in per_concept.values())
    if denom <= 0.0:
        raise MeloError("internal: zero normalisation denominator")
    alpha = abs(a - p_bar) / denom

    item_delta = cfg.sensitivity(item.attempts) * (p_bar - a)
    item.difficulty += item_delta
    item.attempts += 1

    concept_deltas = {}
    for concept, p_l in per_concept.items():
        entry = learner.concepts.get(concept)
        if entry is None:
            entry = ConceptRating(cfg.init_rating, 0)
            learner.concepts[concept] = entry
        delta = alpha * cfg.sensitivity(entry.attempts) * (a - p_l)
        entry.rating += delta
        entry.attempts += 1
        concept_deltas[concept] = delta
    return UpdateDelta(item_delta, None, concept_deltas, p_bar)


def predict(learner: LearnerState, item: ItemState, cfg: EngineConfig) -> float:
    if cfg.variant is Variant.STANDARD_ELO:
        return predict_standard(learner, item, cfg)
    return predict_melo(learner, item, cfg)


def update(learner: LearnerState, item: ItemState, a: int, cfg: EngineConfig) -> UpdateDelta:
    if cfg.variant is Variant.STANDARD_ELO:
        return update_standard(learner, item, a, cfg)
    return update_melo(learner, item, a, cfg)


def replay(
    stream: Iterable[Interaction],
    cfg: EngineConfig,
    initial: ModelState | None = None,
    collect: bool = True,
) -> tuple[ModelState, list[StepResult]]:
    """Run predict-then-update over an ordered stream.

    Pure with respect to its inputs: the initial state is copied, and
    identical (stream, config, initial state) always produce identical final
    states. Unknown students and items auto-register at the initial rating;
    records out of seq order are rejected with their position.
    """
    state = initial.copy() if initial is not None else ModelState()
    steps: list[StepResult] = []
    last_seq: int | None = None
    for position, rec in enumerate(stream):
        if last_seq is not None and rec.seq <= last_seq:
            raise StreamError(
                f"seq {rec.seq} not increasing (previous {last_seq})", position
            )
        last_seq = rec.seq
        learner = state.learners.get(rec.student)
        if learner is None:
            learner = LearnerState(theta=cfg.init_rating)
            state.learners[rec.student] = learner
        item = state.items.get(rec.item)
        if item is None:
            item = ItemState(difficulty=cfg.init_rating)
            state.items[rec.item] = item
        try:
            delta = update(learner, item, rec.correct, cfg)
        except (DomainError, StreamError) as exc:
            raise StreamError(str(exc), position) from exc
        if collect:
            steps.append(
                StepResult(rec.seq, rec.student, rec.item, rec.correct,
                           delta.probability_used, delta)
            )
    return state, steps
