/** Lasso selection: which points fall strictly inside a drawn polygon. */

import type { LayoutPoint } from "./layout.js";

export type Polygon = Array<[number, number]>;

export type LassoResult =
  | { kind: "group"; members: string[] }
  | { kind: "warning"; message: string };

/** Even-odd rule; points exactly on an edge are not "strictly inside" and
 * may fall either way, so lassos should clear the dots they mean to take. */
export function pointInPolygon(x: number, y: number, polygon: Polygon): boolean {
  let inside = false;
  const n = polygon.length;
  for (let i = 0, j = n - 1; i < n; j = i++) {
    const [xi, yi] = polygon[i];
    const [xj, yj] = polygon[j];
    if (yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

export function lassoSelect(polygon: Polygon, layout: LayoutPoint[]): LassoResult {
  if (polygon.length < 3) {
    return { kind: "warning", message: "Draw a closed shape around at least two points." };
  }
  const members = layout
    .filter((p) => pointInPolygon(p.x, p.y, polygon))
    .map((p) => p.label);
  if (members.length < 2) {
    return { kind: "warning", message: "A group needs at least two points." };
  }
  if (members.length === layout.length) {
    return { kind: "warning", message: "A group must leave out at least one point." };
  }
  return { kind: "group", members };
}
