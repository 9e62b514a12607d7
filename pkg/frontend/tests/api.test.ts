import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, BudgetExceededError } from "../src/api.js";
import { buildRedesignRequest } from "../src/requests.js";
import type { ChartDoc, DiagnosisReportDoc } from "../src/types.js";

import chartFixture from "./fixtures/chart.json";
import diagnoseFixture from "./fixtures/diagnose.json";

const chart = chartFixture.chart as ChartDoc;
const report = diagnoseFixture as DiagnosisReportDoc;

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("echoes the server diagnosis verbatim", async () => {
    const client = new ApiClient("", async (url, init) => {
      expect(url).toBe("/api/diagnose");
      expect(JSON.parse(init!.body as string).desired).toEqual([["A", "B"]]);
      return jsonResponse(report);
    });
    const got = await client.diagnose({
      chart,
      desired: [["A", "B"]],
      model_id: "default-v1",
      threshold: 0.9,
    });
    expect(got).toEqual(report);
  });

  it("maps 413 to BudgetExceededError with hierarchy advice", async () => {
    const client = new ApiClient("", async () =>
      new Response("too many permutations", { status: 413 }),
    );
    const call = client.redesign(buildRedesignRequest(chart, [], 0.5));
    await expect(call).rejects.toBeInstanceOf(BudgetExceededError);
    await expect(call).rejects.toMatchObject({
      advisory: expect.stringContaining("hierarchy"),
    });
  });

  it("surfaces other HTTP errors as ApiError", async () => {
    const client = new ApiClient("", async () => new Response("nope", { status: 404 }));
    await expect(
      client.diagnose({ chart, desired: [], model_id: "ghost", threshold: 0.9 }),
    ).rejects.toBeInstanceOf(ApiError);
  });

  it("aborts a superseded redesign request", async () => {
    const seen: AbortSignal[] = [];
    let release: (() => void) | null = null;
    const client = new ApiClient("", (url, init) => {
      seen.push(init!.signal!);
      return new Promise<Response>((resolve, reject) => {
        init!.signal!.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")),
        );
        if (seen.length === 2) {
          release = () => resolve(jsonResponse({ examined: 720, results: [] }));
          release();
        }
      });
    });

    const first = client.redesign(buildRedesignRequest(chart, [], 0.2));
    const second = client.redesign(buildRedesignRequest(chart, [], 0.8));
    await expect(first).rejects.toHaveProperty("name", "AbortError");
    await expect(second).resolves.toEqual({ examined: 720, results: [] });
    expect(seen[0].aborted).toBe(true);
    expect(seen[1].aborted).toBe(false);
    expect(client.redesignInFlight()).toBe(false);
  });
});
