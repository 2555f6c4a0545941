"""Next-item recommendation from concept-level knowledge gaps.

Items are scored by a linear blend of two signals:

* gap: how far the item's tagged concepts sit below the student's own best
  concept (intra-student, range-normalised to [0, 1]);
* difficulty match: how close the predicted success probability is to a
  target in the productive-struggle range (default 0.65).

The blend weights, target probability and pool filtering are all request
parameters; the defaults are this module's own concretisation of
"largest knowledge gap at a matched difficulty".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Mapping

from .model import (
    ConceptId,
    ConfigError,
    DomainError,
    DomainModel,
    EngineConfig,
    ItemId,
    ItemState,
    LearnerState,
    Variant,
    predict_melo,
)


@dataclass(frozen=True)
class RecommendationRequest:
    student: str
    k: int = 5
    target_success: float = 0.65
    concept_filter: frozenset[ConceptId] | None = None
    exclude_attempted: bool = True
    gap_weight: float = 0.5
    difficulty_weight: float = 0.5

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0.0 < self.target_success < 1.0):
            raise ValueError("target_success must be in (0, 1)")


@dataclass(frozen=True)
class ScoredItem:
    item: ItemId
    gap_score: float
    difficulty_match: float
    combined: float
    predicted_success: float


@dataclass
class RecommendationResult:
    items: list[ScoredItem] = field(default_factory=list)
    status: str = "ok"        # "ok" | "empty_pool"


def concept_gaps(
    learner: LearnerState, domain: DomainModel, init: float = 0.0
) -> dict[ConceptId, float]:
    """Gap per concept: distance below the student's best concept, scaled by
    the rating range across the domain. All-equal ratings give uniform 0.5."""
    if len(domain) == 0:
        raise DomainError("empty domain model")
    ratings = {c: learner.concept_rating(c, init) for c in domain.concepts}
    top = max(ratings.values())
    bottom = min(ratings.values())
    if top == bottom:
        return {c: 0.5 for c in ratings}
    span = top - bottom
    return {c: (top - r) / span for c, r in ratings.items()}


def recommend(
    req: RecommendationRequest,
    learner: LearnerState,
    items: Mapping[ItemId, ItemState],
    domain: DomainModel,
    cfg: EngineConfig,
    attempted: AbstractSet[ItemId] = frozenset(),
) -> RecommendationResult:
    """Top-k items by combined gap/difficulty score.

    Ordering is a total order: combined score descending, then fewer item
    attempts, then item id. An empty candidate pool is a status, not an
    error.
    """
    if cfg.variant is not Variant.M_ELO:
        raise ConfigError("recommendations need the melo variant")
    gaps = concept_gaps(learner, domain, cfg.init_rating)
    norm = max(req.target_success, 1.0 - req.target_success)

    scored = []
    for item_id, item in items.items():
        if req.exclude_attempted and item_id in attempted:
            continue
        if not item.tags:
            continue
        if req.concept_filter is not None and not (
            req.concept_filter & set(item.tags)
        ):
            continue
        gap = sum(gaps[c] * w for c, w in item.weights.items() if c in gaps)
        p_hat = predict_melo(learner, item, cfg)
        match = 1.0 - abs(p_hat - req.target_success) / norm
        combined = req.gap_weight * gap + req.difficulty_weight * match
        scored.append(
            (
                -combined,
                item.attempts,
                item_id,
                ScoredItem(item_id, gap, match, combined, p_hat),
            )
        )
    if not scored:
        return RecommendationResult(items=[], status="empty_pool")
    scored.sort(key=lambda t: t[:3])
    return RecommendationResult(items=[s for *_, s in scored[: req.k]])
