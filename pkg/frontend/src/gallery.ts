/** Gallery model: the detected-group tiles, organized by group size, plus a
 * grey strip for desired groups the model did not detect. Pure data; the
 * DOM rendering lives in render.ts. Probabilities and violation flags come
 * straight from the server report. */

import type { Tint } from "./palette.js";
import type { DiagnosisReportDoc } from "./types.js";

export interface GalleryTile {
  members: string[];
  size: number;
  /** null for missed-desired tiles (the model gave no probability). */
  prob: number | null;
  probLabel: string;
  tint: Tint;
  colinear: boolean;
}

export interface GalleryFilters {
  /** show only tiles of this group size */
  size?: number | null;
  /** show only tiles containing every one of these labels */
  members?: string[];
}

export interface GallerySection {
  size: number;
  tiles: GalleryTile[];
}

export interface GalleryModel {
  sections: GallerySection[];
  missed: GalleryTile[];
  /** all sizes present before filtering, for the jump-to-size control */
  sizes: number[];
  empty: boolean;
}

function containsAll(members: string[], wanted: string[]): boolean {
  return wanted.every((w) => members.includes(w));
}

export function buildGallery(
  report: DiagnosisReportDoc,
  filters: GalleryFilters = {},
): GalleryModel {
  const wanted = filters.members ?? [];
  const tiles: GalleryTile[] = report.detected.map((d) => ({
    members: d.members,
    size: d.members.length,
    prob: d.prob,
    probLabel: d.prob.toFixed(2),
    tint: d.violation ? "violation" : "desired",
    colinear: d.colinear,
  }));

  const sizes = [...new Set(tiles.map((t) => t.size))].sort((a, b) => a - b);

  const kept = tiles.filter(
    (t) =>
      (filters.size == null || t.size === filters.size) &&
      (wanted.length === 0 || containsAll(t.members, wanted)),
  );

  const sections: GallerySection[] = [];
  for (const size of sizes) {
    const sectionTiles = kept.filter((t) => t.size === size);
    if (sectionTiles.length > 0) {
      sections.push({ size, tiles: sectionTiles });
    }
  }

  const missed: GalleryTile[] = report.missed_desired
    .filter(
      (members) =>
        (filters.size == null || members.length === filters.size) &&
        (wanted.length === 0 || containsAll(members, wanted)),
    )
    .map((members) => ({
      members,
      size: members.length,
      prob: null,
      probLabel: "—",
      tint: "missed",
      colinear: false,
    }));

  return {
    sections,
    missed,
    sizes,
    empty: sections.length === 0 && missed.length === 0,
  };
}
