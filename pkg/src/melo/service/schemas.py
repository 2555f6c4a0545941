"""Request/response models for the practice-service HTTP API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel


class EngineConfigModel(BaseModel):
    variant: str = "melo"
    k: Optional[float] = None
    gamma: float = 1.8
    beta: float = 0.05
    guess_correction: bool = False
    init_rating: float = 0.0


class CourseCreate(BaseModel):
    id: Optional[str] = None
    concepts: list[str]
    config: Optional[EngineConfigModel] = None  # None -> server default


class CourseInfo(BaseModel):
    id: str
    concepts: list[str]
    config: EngineConfigModel
    watermark: int


class StudentCreate(BaseModel):
    id: str


class RegisteredResponse(BaseModel):
    id: str
    watermark: int


class ItemCreate(BaseModel):
    id: Optional[str] = None
    tags: list[str]
    options: Optional[int] = None
    answer_key: Optional[str] = None


class AnswerSubmit(BaseModel):
    student: str
    item: str
    correct: bool
    idempotency_key: Optional[str] = None


class RatingEntry(BaseModel):
    rating: float
    attempts: int


class AnswerResponse(BaseModel):
    seq: int
    student: str
    item: str
    correct: int
    prediction: float
    item_delta: float
    theta_delta: Optional[float] = None
    concept_deltas: dict[str, float]
    theta: Optional[RatingEntry] = None
    concepts: dict[str, RatingEntry]
    watermark: int


class HistoryEntry(BaseModel):
    seq: int
    item: str
    correct: int
    concepts: dict[str, float]
    theta: Optional[float] = None


class LearnerModelResponse(BaseModel):
    student: str
    watermark: int
    theta: RatingEntry
    concepts: dict[str, RatingEntry]
    history: list[HistoryEntry]


class ConceptAggregate(BaseModel):
    mean: float
    p25: float
    p50: float
    p75: float


class DifficultyAggregate(BaseModel):
    count: int
    mean: float
    min: float
    max: float
    p25: float
    p50: float
    p75: float


class OverviewResponse(BaseModel):
    status: str
    students: int
    watermark: int
    concepts: dict[str, ConceptAggregate]
    difficulty: Optional[DifficultyAggregate] = None


class ScoredItemModel(BaseModel):
    item: str
    gap_score: float
    difficulty_match: float
    combined: float
    predicted_success: float


class RecommendationsResponse(BaseModel):
    student: str
    watermark: int
    status: str
    items: list[ScoredItemModel]


class ItemStatsResponse(BaseModel):
    item: str
    watermark: int
    difficulty: float
    attempts: int
    tags: list[str]
    options: Optional[int] = None
    answer_key: Optional[str] = None


class Problem(BaseModel):
    """JSON problem document: stable code plus a human-readable message."""

    code: str
    message: str
