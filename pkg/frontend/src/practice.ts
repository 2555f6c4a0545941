// Practice-loop state machine: fetch -> answer -> reveal delta -> refresh.
//
// One idempotency key is minted per presented item, and the submitted flag
// flips synchronously before the request leaves, so a presentation can
// never be submitted twice -- double clicks, retries after reveal and
// concurrent calls all throw. The UI is never optimistic: bars change only
// after the authoritative answer response arrives.

import type { PracticeApi } from "./api.js";
import type { AnswerResponse, LearnerModelResponse, ScoredItem } from "./types.js";

export type PracticePhase =
  | "idle"        // nothing loaded or queue exhausted
  | "loading"     // fetching model + queue
  | "ready"       // an item is presented, awaiting the student's answer
  | "submitting"  // answer in flight
  | "revealed";   // delta shown; call next() to continue

export class DoubleSubmitError extends Error {
  constructor(item: string) {
    super(`item ${item} was already submitted for this presentation`);
  }
}

export interface Presentation {
  item: string;
  idempotencyKey: string;
  submitted: boolean;
}

const defaultKeyGen = (): string =>
  globalThis.crypto?.randomUUID?.() ??
  `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;

export class PracticeSession {
  phase: PracticePhase = "idle";
  model: LearnerModelResponse | null = null;
  queue: ScoredItem[] = [];
  current: Presentation | null = null;
  lastAnswer: AnswerResponse | null = null;

  constructor(
    private api: PracticeApi,
    private course: string,
    private student: string,
    private queueSize = 5,
    private newKey: () => string = defaultKeyGen,
  ) {}

  /** Load the learner model and the recommendation queue, present the top
   * item. */
  async start(): Promise<void> {
    this.phase = "loading";
    this.model = await this.api.learnerModel(this.course, this.student);
    await this.refreshQueue();
  }

  private async refreshQueue(): Promise<void> {
    const recs = await this.api.recommendations(
      this.course, this.student, this.queueSize,
    );
    this.queue = recs.items;
    const head = this.queue[0];
    if (!head) {
      this.phase = "idle";
      this.current = null;
      return;
    }
    this.current = { item: head.item, idempotencyKey: this.newKey(), submitted: false };
    this.phase = "ready";
  }

  /** Submit the outcome for the presented item. Exactly once per
   * presentation; returns the authoritative response with the deltas to
   * animate. */
  async submit(correct: boolean): Promise<AnswerResponse> {
    if (this.phase !== "ready" || this.current === null || this.current.submitted) {
      throw new DoubleSubmitError(this.current?.item ?? "<none>");
    }
    this.current.submitted = true;
    this.phase = "submitting";
    const response = await this.api.submitAnswer(this.course, {
      student: this.student,
      item: this.current.item,
      correct,
      idempotency_key: this.current.idempotencyKey,
    });
    this.lastAnswer = response;
    this.phase = "revealed";
    return response;
  }

  /** After the reveal: refresh the model snapshot and queue, present the
   * next item (with a fresh idempotency key). */
  async next(): Promise<void> {
    if (this.phase !== "revealed") {
      throw new Error(`next() called in phase ${this.phase}`);
    }
    this.phase = "loading";
    this.model = await this.api.learnerModel(this.course, this.student);
    if (this.lastAnswer && this.model.watermark < this.lastAnswer.watermark) {
      // stale snapshot: the answer we just made is not visible yet
      this.model = await this.api.learnerModel(this.course, this.student);
    }
    await this.refreshQueue();
  }
}
