/** HTTP client. Redesign calls go through a single-flight gate: starting a
 * new search aborts the superseded in-flight one. */

import type {
  ChartDoc,
  DiagnoseRequestDoc,
  DiagnosisReportDoc,
  RedesignRequestDoc,
  RedesignResponseDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class BudgetExceededError extends ApiError {
  readonly advisory =
    "The search space is too large for exhaustive redesign; " +
    "add hierarchy constraints to shrink it.";

  constructor(message: string) {
    super(413, message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseJson(response: Response): Promise<unknown> {
  if (response.status === 413) {
    throw new BudgetExceededError(await response.text());
  }
  if (!response.ok) {
    throw new ApiError(response.status, await response.text());
  }
  return response.json();
}

export class ApiClient {
  private redesignController: AbortController | null = null;

  constructor(
    private readonly base = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private post(path: string, body: unknown, signal?: AbortSignal): Promise<Response> {
    return this.fetchFn(`${this.base}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
  }

  async randomChart(n: number, seed: number): Promise<{ id: string; chart: ChartDoc }> {
    const response = await this.fetchFn(
      `${this.base}/api/charts/random?n=${n}&seed=${seed}`,
      { method: "POST" },
    );
    return (await parseJson(response)) as { id: string; chart: ChartDoc };
  }

  async diagnose(request: DiagnoseRequestDoc): Promise<DiagnosisReportDoc> {
    const response = await this.post("/api/diagnose", request);
    return (await parseJson(response)) as DiagnosisReportDoc;
  }

  /** At most one redesign in flight; a newer call aborts the older one,
   * whose promise rejects with an AbortError. */
  async redesign(request: RedesignRequestDoc): Promise<RedesignResponseDoc> {
    this.redesignController?.abort();
    const controller = new AbortController();
    this.redesignController = controller;
    try {
      const response = await this.post("/api/redesign", request, controller.signal);
      return (await parseJson(response)) as RedesignResponseDoc;
    } finally {
      if (this.redesignController === controller) {
        this.redesignController = null;
      }
    }
  }

  redesignInFlight(): boolean {
    return this.redesignController !== null;
  }
}
