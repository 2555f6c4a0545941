// Instructor aggregates view: cohort bars per concept in exactly the API's
// order, the item-difficulty distribution summary, and per-student
// drill-down rows taken verbatim from the learner-model payload.

import type {
  DifficultyAggregate,
  LearnerModelResponse,
  OverviewResponse,
} from "./types.js";
import { barFraction } from "./viewmodel.js";

export interface CohortBar {
  concept: string;
  mean: number;   // = overview.concepts[concept].mean
  p25: number;
  p50: number;
  p75: number;
  fraction: number;  // layout only
}

export interface InstructorViewModel {
  status: string;
  students: number;
  watermark: number;
  bars: CohortBar[];             // API order preserved
  difficulty: DifficultyAggregate | null;
}

export function buildInstructorView(
  overview: OverviewResponse,
  range = 3,
): InstructorViewModel {
  return {
    status: overview.status,
    students: overview.students,
    watermark: overview.watermark,
    bars: Object.entries(overview.concepts).map(([concept, agg]) => ({
      concept,
      mean: agg.mean,
      p25: agg.p25,
      p50: agg.p50,
      p75: agg.p75,
      fraction: barFraction(agg.mean, range),
    })),
    difficulty: overview.difficulty,
  };
}

export interface DrilldownRow {
  concept: string;
  rating: number;    // = model.concepts[concept].rating
  attempts: number;
}

export function buildDrilldown(model: LearnerModelResponse): DrilldownRow[] {
  return Object.entries(model.concepts).map(([concept, entry]) => ({
    concept,
    rating: entry.rating,
    attempts: entry.attempts,
  }));
}
