// Pure builders turning API payloads into what the UI binds to. Every
// number in these view models is copied verbatim from a payload field;
// the only computed value is the bar fraction, which is layout geometry.

import type {
  AnswerResponse,
  LearnerModelResponse,
  RecommendationsResponse,
  ScoredItem,
} from "./types.js";

export interface ConceptBar {
  concept: string;
  rating: number;         // = model.concepts[concept].rating
  attempts: number;       // = model.concepts[concept].attempts
  delta: number | null;   // = lastAnswer.concept_deltas[concept], if touched
  fraction: number;       // bar length in [0, 1]; presentation only
  sparkline: number[];    // = history ratings for this concept, in seq order
}

export interface PracticeViewModel {
  student: string;
  watermark: number;
  bars: ConceptBar[];
}

/** Map a rating onto [0, 1] for bar geometry. Ratings are unbounded; the
 * default window of +/-3 covers anything a fresh course can reach. */
export function barFraction(rating: number, range = 3): number {
  const fraction = (rating + range) / (2 * range);
  return Math.min(1, Math.max(0, fraction));
}

export function buildConceptBars(
  model: LearnerModelResponse,
  lastAnswer: AnswerResponse | null = null,
  range = 3,
): PracticeViewModel {
  const bars: ConceptBar[] = Object.entries(model.concepts).map(
    ([concept, entry]) => ({
      concept,
      rating: entry.rating,
      attempts: entry.attempts,
      delta:
        lastAnswer && concept in lastAnswer.concept_deltas
          ? lastAnswer.concept_deltas[concept]!
          : null,
      fraction: barFraction(entry.rating, range),
      sparkline: model.history
        .filter((h) => concept in h.concepts)
        .map((h) => h.concepts[concept]!),
    }),
  );
  return { student: model.student, watermark: model.watermark, bars };
}

export interface QueueEntry {
  item: string;
  predictedSuccess: number;  // = payload predicted_success
  combined: number;          // = payload combined
  gapScore: number;          // = payload gap_score
}

export interface QueueViewModel {
  status: string;
  watermark: number;
  entries: QueueEntry[];     // exactly the payload order; no re-sorting
}

export function buildQueue(recs: RecommendationsResponse): QueueViewModel {
  return {
    status: recs.status,
    watermark: recs.watermark,
    entries: recs.items.map((s: ScoredItem) => ({
      item: s.item,
      predictedSuccess: s.predicted_success,
      combined: s.combined,
      gapScore: s.gap_score,
    })),
  };
}
