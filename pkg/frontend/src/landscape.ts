/** Heatmap model for the permutation landscape: rows are desired-groups-met
 * (best row on top), columns are violation counts, each cell carries the
 * permutation count and exemplar orders from the server. */

import type { LandscapeCellDoc, LandscapeDoc } from "./types.js";

export interface HeatmapRow {
  desiredMet: number;
  cells: Array<LandscapeCellDoc | null>;
}

export interface HeatmapModel {
  violationLevels: number[];
  rows: HeatmapRow[];
  maxCount: number;
  total: number;
}

export function buildHeatmap(doc: LandscapeDoc): HeatmapModel {
  const violationLevels = [...new Set(doc.cells.map((c) => c.violations))].sort(
    (a, b) => a - b,
  );
  const desiredLevels = [...new Set(doc.cells.map((c) => c.desired_met))].sort(
    (a, b) => b - a,
  );
  const byKey = new Map<string, LandscapeCellDoc>();
  for (const cell of doc.cells) {
    byKey.set(`${cell.violations}:${cell.desired_met}`, cell);
  }
  const rows = desiredLevels.map((met) => ({
    desiredMet: met,
    cells: violationLevels.map((v) => byKey.get(`${v}:${met}`) ?? null),
  }));
  return {
    violationLevels,
    rows,
    maxCount: Math.max(...doc.cells.map((c) => c.count)),
    total: doc.total,
  };
}
