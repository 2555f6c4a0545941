// Loader for the recorded service fixtures (see scripts/record_fixtures.py
// in the repository root: real responses captured from the live service).

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type {
  AnswerResponse,
  ItemStatsResponse,
  LearnerModelResponse,
  OverviewResponse,
  Problem,
  RecommendationsResponse,
} from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function load<T>(name: string): T {
  return JSON.parse(
    readFileSync(join(here, "..", "fixtures", `${name}.json`), "utf-8"),
  ) as T;
}

export const fixtures = {
  modelFresh: () => load<LearnerModelResponse>("model_fresh"),
  modelAfter: () => load<LearnerModelResponse>("model_after"),
  answerSingle: () => load<AnswerResponse>("answer_single"),
  answerMulti: () => load<AnswerResponse>("answer_multi"),
  answerIncorrect: () => load<AnswerResponse>("answer_incorrect"),
  recommendations: () => load<RecommendationsResponse>("recommendations"),
  overview: () => load<OverviewResponse>("overview"),
  itemStats: () => load<ItemStatsResponse>("item_stats"),
  problem: () => load<Problem>("problem_not_found"),
};
