/** Designer session state kept in the browser. Desired groups are committed
 * client-side and sent whole with every diagnose/redesign call. */

import type { Polygon } from "./lasso.js";
import { normalizeGroup, sameGroup } from "./requests.js";
import type { ChartDoc } from "./types.js";

export interface SelectionState {
  chart: ChartDoc;
  /** lasso polygon currently being drawn */
  polygon: Polygon;
  /** committed desired groups */
  desired: string[][];
  hovered: string[] | null;
  pinned: string[] | null;
  alpha: number;
  /** server-recommended order applied locally, if any */
  activeOrder: string[] | null;
}

export function initialState(chart: ChartDoc): SelectionState {
  return {
    chart,
    polygon: [],
    desired: [],
    hovered: null,
    pinned: null,
    alpha: 0.7,
    activeOrder: null,
  };
}

/** Commit a lassoed group; enforces the group invariants before any server
 * call sees it (2 <= size <= n-1, members exist, no duplicates). */
export function commitGroup(state: SelectionState, members: string[]): SelectionState {
  const group = normalizeGroup(members);
  const labels = new Set(state.chart.points.map((p) => p.label));
  if (group.length < 2 || group.length > labels.size - 1) {
    throw new Error(`group size ${group.length} outside [2, ${labels.size - 1}]`);
  }
  for (const m of group) {
    if (!labels.has(m)) {
      throw new Error(`unknown label ${m}`);
    }
  }
  if (state.desired.some((g) => sameGroup(g, group))) {
    return state;
  }
  return { ...state, desired: [...state.desired, group], polygon: [] };
}

export function removeGroup(state: SelectionState, members: string[]): SelectionState {
  return {
    ...state,
    desired: state.desired.filter((g) => !sameGroup(g, members)),
  };
}
