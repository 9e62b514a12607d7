/** Designer app: draw desired groups on the chart, browse the detected
 * gallery, and ask for x-axis redesigns. All analysis comes from the
 * groupsense HTTP service. */

import { ApiClient, BudgetExceededError } from "./api.js";
import { buildGallery, type GalleryFilters } from "./gallery.js";
import { buildHeatmap } from "./landscape.js";
import { layoutChart } from "./layout.js";
import { lassoSelect, type Polygon } from "./lasso.js";
import { COLORBLIND_PALETTE, DEFAULT_PALETTE, type Palette } from "./palette.js";
import { renderChart, renderGallery, renderLandscape, renderResults } from "./render.js";
import { applyOrder, buildDiagnoseRequest, buildRedesignRequest } from "./requests.js";
import { commitGroup, initialState, removeGroup, type SelectionState } from "./state.js";
import type {
  DiagnosisReportDoc,
  LandscapeDoc,
  PermutationScoreDoc,
  RedesignResponseDoc,
} from "./types.js";

const api = new ApiClient("");

let state: SelectionState | null = null;
let report: DiagnosisReportDoc | null = null;
let redesignResponse: RedesignResponseDoc | null = null;
let landscapeDoc: LandscapeDoc | null = null;
let palette: Palette = DEFAULT_PALETTE;
let filters: GalleryFilters = {};
let drawing = false;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

function status(text: string, isError = false): void {
  const bar = $("status");
  bar.textContent = text;
  bar.classList.toggle("error", isError);
}

function activeChart() {
  if (!state) throw new Error("no chart loaded");
  return state.activeOrder ? applyOrder(state.chart, state.activeOrder) : state.chart;
}

function polygonPath(polygon: Polygon): string | null {
  if (polygon.length < 2) return null;
  return `M ${polygon.map(([x, y]) => `${x} ${y}`).join(" L ")} Z`;
}

function redrawChart(): void {
  if (!state) return;
  renderChart(
    $("chart"),
    activeChart(),
    palette,
    state.hovered,
    state.desired,
    polygonPath(state.polygon),
  );
}

function redrawGallery(): void {
  if (!state || !report) return;
  const model = buildGallery(report, filters);
  renderGallery($("gallery"), activeChart(), model, palette, (members) => {
    if (!state) return;
    state = { ...state, hovered: members };
    redrawChart();
  });
  const jump = $("size-jump");
  jump.replaceChildren();
  for (const size of model.sizes) {
    const btn = document.createElement("button");
    btn.type = "button";
    btn.textContent = `${size}`;
    btn.classList.toggle("active", filters.size === size);
    btn.addEventListener("click", () => {
      filters = { ...filters, size: filters.size === size ? null : size };
      redrawGallery();
    });
    jump.appendChild(btn);
  }
}

function redrawDesired(): void {
  if (!state) return;
  const box = $("desired-list");
  box.replaceChildren();
  for (const group of state.desired) {
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.textContent = group.join("");
    const x = document.createElement("button");
    x.type = "button";
    x.textContent = "×";
    x.addEventListener("click", () => {
      if (!state) return;
      state = removeGroup(state, group);
      redrawDesired();
      void refreshDiagnosis();
    });
    chip.appendChild(x);
    box.appendChild(chip);
  }
}

async function refreshDiagnosis(): Promise<void> {
  if (!state) return;
  status("Diagnosing…");
  try {
    report = await api.diagnose(buildDiagnoseRequest(activeChart(), state.desired));
    status(`${report.detected.length} data-induced groups (model ${report.model_version})`);
    redrawGallery();
    redrawChart();
  } catch (err) {
    status(`Diagnosis failed: ${(err as Error).message}`, true);
  }
}

async function generateRedesign(): Promise<void> {
  if (!state) return;
  status("Searching permutations…");
  $("generate").setAttribute("disabled", "");
  try {
    const request = buildRedesignRequest(state.chart, state.desired, state.alpha, 5, true);
    redesignResponse = await api.redesign(request);
    landscapeDoc = redesignResponse.landscape ?? null;
    status(`Examined ${redesignResponse.examined} permutations.`);
    renderResults($("results"), redesignResponse.results, state.activeOrder, pickResult);
    renderLandscape($("landscape"), landscapeDoc ? buildHeatmap(landscapeDoc) : null, (cell) => {
      status(
        `${cell.count} permutations with ${cell.violations} violations / ` +
          `${cell.desired_met} desired met. Examples: ` +
          cell.exemplars.map((e) => e.join("")).join(", "),
      );
    });
  } catch (err) {
    if (err instanceof BudgetExceededError) {
      status(err.advisory, true);
    } else if ((err as Error).name !== "AbortError") {
      status(`Redesign failed: ${(err as Error).message}`, true);
    }
  } finally {
    $("generate").removeAttribute("disabled");
  }
}

function pickResult(result: PermutationScoreDoc): void {
  if (!state) return;
  state = { ...state, activeOrder: result.order };
  // the recommendation embeds its own report: no extra round trip
  report = result.report;
  redrawChart();
  redrawGallery();
  if (redesignResponse) {
    renderResults($("results"), redesignResponse.results, result.order, pickResult);
  }
  status(`Applied ${result.order.join(" ")} (s ${result.s.toFixed(3)})`);
}

function svgPoint(svg: SVGSVGElement, event: PointerEvent): [number, number] {
  const rect = svg.getBoundingClientRect();
  const chart = activeChart();
  return [
    ((event.clientX - rect.left) / rect.width) * chart.plot.width_px,
    ((event.clientY - rect.top) / rect.height) * chart.plot.height_px,
  ];
}

function wireLasso(): void {
  const container = $("chart");
  container.addEventListener("pointerdown", (event) => {
    if (!state) return;
    const svg = container.querySelector("svg");
    if (!svg) return;
    drawing = true;
    state = { ...state, polygon: [svgPoint(svg, event as PointerEvent)] };
    container.setPointerCapture((event as PointerEvent).pointerId);
  });
  container.addEventListener("pointermove", (event) => {
    if (!drawing || !state) return;
    const svg = container.querySelector("svg");
    if (!svg) return;
    state = {
      ...state,
      polygon: [...state.polygon, svgPoint(svg, event as PointerEvent)],
    };
    redrawChart();
  });
  container.addEventListener("pointerup", () => {
    if (!drawing || !state) return;
    drawing = false;
    const result = lassoSelect(state.polygon, layoutChart(activeChart()));
    if (result.kind === "warning") {
      status(result.message, true);
      state = { ...state, polygon: [] };
      redrawChart();
      return;
    }
    try {
      state = commitGroup(state, result.members);
    } catch (err) {
      status((err as Error).message, true);
      return;
    }
    redrawDesired();
    redrawChart();
    void refreshDiagnosis();
  });
}

async function loadChart(seed: number): Promise<void> {
  const { chart } = await api.randomChart(6, seed);
  state = initialState(chart);
  report = null;
  redesignResponse = null;
  landscapeDoc = null;
  filters = {};
  redrawDesired();
  renderResults($("results"), [], null, pickResult);
  renderLandscape($("landscape"), null, () => undefined);
  redrawChart();
  await refreshDiagnosis();
}

function wireControls(): void {
  const alpha = $<HTMLInputElement>("alpha");
  alpha.addEventListener("input", () => {
    if (!state) return;
    state = { ...state, alpha: Number(alpha.value) };
    $("alpha-value").textContent = Number(alpha.value).toFixed(2);
  });
  $("generate").addEventListener("click", () => void generateRedesign());
  $<HTMLInputElement>("member-filter").addEventListener("input", (event) => {
    const raw = (event.target as HTMLInputElement).value.trim();
    filters = {
      ...filters,
      members: raw ? raw.split(/[\s,;]+/).map((s) => s.toUpperCase()) : [],
    };
    redrawGallery();
  });
  $("palette-toggle").addEventListener("click", () => {
    palette = palette.name === "default" ? COLORBLIND_PALETTE : DEFAULT_PALETTE;
    $("palette-toggle").textContent =
      palette.name === "default" ? "Colorblind palette" : "Default palette";
    redrawChart();
    redrawGallery();
  });
  $("new-chart").addEventListener("click", () => {
    void loadChart(Math.floor(Math.random() * 100000));
  });
  $("reset-order").addEventListener("click", () => {
    if (!state) return;
    state = { ...state, activeOrder: null };
    redrawChart();
    void refreshDiagnosis();
  });
}

export function start(): void {
  wireControls();
  wireLasso();
  void loadChart(7);
}

start();
