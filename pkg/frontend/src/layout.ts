/** Slot layout for drawing: point i of n at the center of x-slot i, values
 * mapped linearly into the padded vertical band (screen y grows downward).
 * Mirrors the server layout so lassos land where the dots are; verified
 * against recorded engine coordinates in the contract tests. */

import type { ChartDoc } from "./types.js";

export interface LayoutPoint {
  label: string;
  value: number;
  x: number;
  y: number;
}

export function layoutChart(chart: ChartDoc): LayoutPoint[] {
  const { width_px, height_px, pad_fraction, value_min, value_max } = chart.plot;
  const n = chart.points.length;
  const span = value_max - value_min;
  const band = (1 - 2 * pad_fraction) * height_px;
  return chart.points.map((p, i) => ({
    label: p.label,
    value: p.value,
    x: (width_px * (i + 0.5)) / n,
    y: pad_fraction * height_px + ((value_max - p.value) / span) * band,
  }));
}
