/**
 * Typed HTTP client for the relevance-interval session service.
 *
 * The client moves JSON between the browser and the server and nothing
 * else: every number displayed by the UI originates from a response
 * returned here.
 */

export interface BaselineSummary {
  C: number;
  mu: number;
  rho: number;
  cv_score: number;
}

/** One feature row of the unconstrained results document. */
export interface FeatureResult {
  name: string;
  lower: number | null;
  upper: number | null;
  lower_norm: number | null;
  upper_norm: number | null;
  class: 0 | 1 | 2;
}

export interface ResultsDocument {
  schema: number;
  baseline: BaselineSummary;
  threshold: number;
  features: FeatureResult[];
}

/** Feature index (as a JSON object key) to an inclusive [min, max] pin. */
export type ConstraintMap = Record<string, [number, number]>;

/** One feature row of a constrained-recompute response. */
export interface IntervalFeature {
  feature: string;
  lower: number | null;
  upper: number | null;
  lower_norm: number | null;
  upper_norm: number | null;
  error?: string;
}

export interface ConstrainedResponse {
  schema: number;
  constraints: ConstraintMap;
  intervals: {
    delta: number;
    mu: number;
    features: IntervalFeature[];
  };
}

export interface SessionCreated {
  id: string;
  baseline: BaselineSummary;
}

export interface SessionParams {
  label_column?: string;
  delta?: number;
  pi_p?: number;
  probes?: number;
  seed?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** Message shown when the server reports an infeasible constraint set. */
export const INFEASIBLE_MESSAGE =
  "no equivalent model satisfies these constraints";

/**
 * Turn a thrown value into banner text plus whether offering a revert
 * action makes sense (it does for infeasible constraint sets, which leave
 * the session state untouched on the server).
 */
export function describeError(error: unknown): {
  message: string;
  revertable: boolean;
} {
  if (error instanceof ApiError && error.status === 409) {
    return { message: INFEASIBLE_MESSAGE, revertable: true };
  }
  if (error instanceof ApiError) {
    return { message: error.detail, revertable: false };
  }
  return { message: String(error), revertable: false };
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class RelintClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private url(path: string, params?: Record<string, string | number>): string {
    const query = params
      ? "?" +
        Object.entries(params)
          .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
          .join("&")
      : "";
    return `${this.baseUrl}${path}${query}`;
  }

  private async request<T>(path: string, init: RequestInit): Promise<T> {
    const response = await this.fetchImpl(path, init);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  async health(): Promise<{ status: string }> {
    return this.request(this.url("/health"), { method: "GET" });
  }

  async createSession(
    csv: string | Blob,
    params: SessionParams = {},
  ): Promise<SessionCreated> {
    return this.request(this.url("/sessions", { ...params }), {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
  }

  async getResults(sessionId: string): Promise<ResultsDocument> {
    return this.request(this.url(`/sessions/${sessionId}/results`), {
      method: "GET",
    });
  }

  async applyConstraints(
    sessionId: string,
    constraints: ConstraintMap,
  ): Promise<ConstrainedResponse> {
    return this.request(this.url(`/sessions/${sessionId}/constraints`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ constraints }),
    });
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.request(this.url(`/sessions/${sessionId}`), {
      method: "DELETE",
    });
  }
}

/**
 * Serializes submissions so that at most one request is in flight; edits
 * made while a recompute is pending run afterwards in arrival order.
 */
export class RequestQueue {
  private tail: Promise<unknown> = Promise.resolve();

  enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.tail.then(task, task);
    this.tail = next.catch(() => undefined);
    return next;
  }
}
