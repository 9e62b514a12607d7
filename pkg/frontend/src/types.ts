/** Wire types for the groupsense HTTP API. The UI never computes
 * probabilities, violation flags, or scores itself; everything shown is
 * echoed from these documents. */

export interface PointDoc {
  label: string;
  value: number;
}

export interface CategoryDoc {
  name: string;
  members: string[];
}

export interface PlotDoc {
  width_px: number;
  height_px: number;
  pad_fraction: number;
  value_min: number;
  value_max: number;
}

export interface ChartDoc {
  points: PointDoc[];
  hierarchy?: CategoryDoc[] | null;
  plot: PlotDoc;
}

export interface DetectedGroupDoc {
  members: string[];
  prob: number;
  violation: boolean;
  colinear: boolean;
}

export interface DiagnosisReportDoc {
  chart_id: string;
  desired: string[][];
  detected: DetectedGroupDoc[];
  missed_desired: string[][];
  threshold: number;
  model_version: string;
}

export interface DiagnoseRequestDoc {
  chart?: ChartDoc;
  chart_id?: string;
  desired: string[][];
  model_id: string;
  threshold: number;
}

export interface RedesignRequestDoc extends DiagnoseRequestDoc {
  alpha: number;
  k: number;
  include_landscape: boolean;
}

export interface PermutationScoreDoc {
  order: string[];
  s: number;
  s_d: number;
  s_v: number;
  desired_met: number;
  report: DiagnosisReportDoc;
}

export interface LandscapeCellDoc {
  violations: number;
  desired_met: number;
  count: number;
  exemplars: string[][];
}

export interface LandscapeDoc {
  total: number;
  cells: LandscapeCellDoc[];
}

export interface RedesignResponseDoc {
  examined: number;
  results: PermutationScoreDoc[];
  landscape?: LandscapeDoc;
}
