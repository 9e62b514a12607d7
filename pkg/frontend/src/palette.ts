/** Tile tint colors. Default follows the red/blue convention (violations
 * red, desired blue); the alternate palette is colorblind-safe. */

export type Tint = "desired" | "violation" | "missed" | "plain";

export interface Palette {
  name: string;
  desired: string;
  violation: string;
  missed: string;
  plain: string;
}

export const DEFAULT_PALETTE: Palette = {
  name: "default",
  desired: "#2166ac",
  violation: "#d73027",
  missed: "#9c9c9c",
  plain: "#444444",
};

// Okabe-Ito blue/orange, distinguishable under common color deficiencies
export const COLORBLIND_PALETTE: Palette = {
  name: "colorblind",
  desired: "#0072b2",
  violation: "#e69f00",
  missed: "#9c9c9c",
  plain: "#444444",
};

export function tintColor(palette: Palette, tint: Tint): string {
  return palette[tint];
}
