/** Request construction and the one piece of local chart manipulation the
 * UI is allowed: reordering points to a server-recommended permutation. */

import type {
  ChartDoc,
  DiagnoseRequestDoc,
  RedesignRequestDoc,
} from "./types.js";

export const DEFAULT_MODEL_ID = "default-v1";
export const DEFAULT_THRESHOLD = 0.9;

export function buildDiagnoseRequest(
  chart: ChartDoc,
  desired: string[][],
  modelId: string = DEFAULT_MODEL_ID,
  threshold: number = DEFAULT_THRESHOLD,
): DiagnoseRequestDoc {
  return { chart, desired, model_id: modelId, threshold };
}

export function buildRedesignRequest(
  chart: ChartDoc,
  desired: string[][],
  alpha: number,
  k = 5,
  includeLandscape = true,
  modelId: string = DEFAULT_MODEL_ID,
  threshold: number = DEFAULT_THRESHOLD,
): RedesignRequestDoc {
  if (alpha < 0 || alpha > 1) {
    throw new RangeError(`alpha must lie in [0, 1], got ${alpha}`);
  }
  return {
    chart,
    desired,
    alpha,
    k,
    include_landscape: includeLandscape,
    model_id: modelId,
    threshold,
  };
}

/** Reorder the chart's points to the given label order; values, hierarchy,
 * and plot geometry are untouched. */
export function applyOrder(chart: ChartDoc, order: string[]): ChartDoc {
  const byLabel = new Map(chart.points.map((p) => [p.label, p]));
  if (
    order.length !== chart.points.length ||
    new Set(order).size !== order.length ||
    order.some((l) => !byLabel.has(l))
  ) {
    throw new Error(`order is not a permutation of the chart labels: ${order.join(",")}`);
  }
  return {
    ...chart,
    points: order.map((label) => byLabel.get(label)!),
  };
}

/** Canonical form for a committed desired group (sorted, deduplicated). */
export function normalizeGroup(members: string[]): string[] {
  return [...new Set(members)].sort();
}

export function sameGroup(a: string[], b: string[]): boolean {
  const na = normalizeGroup(a);
  const nb = normalizeGroup(b);
  return na.length === nb.length && na.every((m, i) => m === nb[i]);
}
