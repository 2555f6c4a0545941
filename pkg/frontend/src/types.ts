// API payload shapes, mirroring the service's response models. The client
// never recomputes any of these numbers; it only carries them to the screen.

export interface RatingEntry {
  rating: number;
  attempts: number;
}

export interface AnswerResponse {
  seq: number;
  student: string;
  item: string;
  correct: number;
  prediction: number;
  item_delta: number;
  theta_delta: number | null;
  concept_deltas: Record<string, number>;
  theta: RatingEntry | null;
  concepts: Record<string, RatingEntry>;
  watermark: number;
}

export interface HistoryEntry {
  seq: number;
  item: string;
  correct: number;
  concepts: Record<string, number>;
  theta: number | null;
}

export interface LearnerModelResponse {
  student: string;
  watermark: number;
  theta: RatingEntry;
  concepts: Record<string, RatingEntry>;
  history: HistoryEntry[];
}

export interface ScoredItem {
  item: string;
  gap_score: number;
  difficulty_match: number;
  combined: number;
  predicted_success: number;
}

export interface RecommendationsResponse {
  student: string;
  watermark: number;
  status: string;
  items: ScoredItem[];
}

export interface ConceptAggregate {
  mean: number;
  p25: number;
  p50: number;
  p75: number;
}

export interface DifficultyAggregate {
  count: number;
  mean: number;
  min: number;
  max: number;
  p25: number;
  p50: number;
  p75: number;
}

export interface OverviewResponse {
  status: string;
  students: number;
  watermark: number;
  concepts: Record<string, ConceptAggregate>;
  difficulty: DifficultyAggregate | null;
}

export interface ItemStatsResponse {
  item: string;
  watermark: number;
  difficulty: number;
  attempts: number;
  tags: string[];
  options: number | null;
  answer_key: string | null;
}

export interface Problem {
  code: string;
  message: string;
}

export interface AnswerSubmit {
  student: string;
  item: string;
  correct: boolean;
  idempotency_key: string;
}
