import type {
  AnswerResponse,
  AnswerSubmit,
  ItemStatsResponse,
  LearnerModelResponse,
  OverviewResponse,
  Problem,
  RecommendationsResponse,
} from "./types.js";

/** Thrown for non-2xx responses carrying a service problem document. */
export class ApiError extends Error {
  constructor(public status: number, public problem: Problem) {
    super(`${problem.code}: ${problem.message}`);
  }
}

/** The slice of the service the dashboard talks to. */
export interface PracticeApi {
  learnerModel(course: string, student: string): Promise<LearnerModelResponse>;
  recommendations(course: string, student: string, k: number): Promise<RecommendationsResponse>;
  submitAnswer(course: string, body: AnswerSubmit): Promise<AnswerResponse>;
  overview(course: string): Promise<OverviewResponse>;
  itemStats(course: string, item: string): Promise<ItemStatsResponse>;
}

export class HttpPracticeApi implements PracticeApi {
  constructor(private baseUrl: string, private token?: string) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      ...init,
      headers: { ...this.headers(), ...(init?.headers ?? {}) },
    });
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body as Problem);
    }
    return body as T;
  }

  learnerModel(course: string, student: string): Promise<LearnerModelResponse> {
    return this.request(`/courses/${course}/students/${student}/model`);
  }

  recommendations(course: string, student: string, k: number): Promise<RecommendationsResponse> {
    return this.request(
      `/courses/${course}/students/${student}/recommendations?k=${k}`,
    );
  }

  submitAnswer(course: string, body: AnswerSubmit): Promise<AnswerResponse> {
    return this.request(`/courses/${course}/answers`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  overview(course: string): Promise<OverviewResponse> {
    return this.request(`/courses/${course}/overview`);
  }

  itemStats(course: string, item: string): Promise<ItemStatsResponse> {
    return this.request(`/courses/${course}/items/${item}/stats`);
  }
}
