"""Online learner modeling with the Elo and multi-concept M-Elo rating models.

Core pieces: the rating engine (melo.model), a synthetic 2PL cohort
simulator (melo.synth), a KDD-Cup-2010 log parser (melo.kddcup), an
evaluation harness (melo.evaluation), a knowledge-gap recommender
(melo.recommend) and an event-sourced practice service (melo.service).
"""

from .model import (
    ConceptRating,
    ConfigError,
    DomainError,
    DomainModel,
    EngineConfig,
    Interaction,
    ItemState,
    LearnerState,
    MeloError,
    ModelState,
    StepResult,
    StreamError,
    UpdateDelta,
    Variant,
    average_competency,
    concept_weights,
    logistic,
    melo_alpha,
    predict,
    predict_melo,
    predict_standard,
    replay,
    uncertainty,
    update,
    update_melo,
    update_standard,
)

__all__ = [
    "ConceptRating",
    "ConfigError",
    "DomainError",
    "DomainModel",
    "EngineConfig",
    "Interaction",
    "ItemState",
    "LearnerState",
    "MeloError",
    "ModelState",
    "StepResult",
    "StreamError",
    "UpdateDelta",
    "Variant",
    "average_competency",
    "concept_weights",
    "logistic",
    "melo_alpha",
    "predict",
    "predict_melo",
    "predict_standard",
    "replay",
    "uncertainty",
    "update",
    "update_melo",
    "update_standard",
]
