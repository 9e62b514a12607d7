/** SVG/DOM rendering for the main chart, the gallery, and the landscape. */

import type { GalleryModel, GalleryTile } from "./gallery.js";
import type { HeatmapModel } from "./landscape.js";
import { layoutChart } from "./layout.js";
import type { Palette } from "./palette.js";
import { tintColor } from "./palette.js";
import type { ChartDoc, LandscapeCellDoc, PermutationScoreDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export function renderChart(
  container: HTMLElement,
  chart: ChartDoc,
  palette: Palette,
  highlight: string[] | null,
  desired: string[][],
  polygonPath: string | null,
): SVGSVGElement {
  const { width_px, height_px } = chart.plot;
  container.replaceChildren();
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width_px} ${height_px}`,
    class: "dotplot",
  });
  svg.appendChild(
    svgEl("rect", { x: 0, y: 0, width: width_px, height: height_px, class: "plot-bg" }),
  );
  const desiredMembers = new Set(desired.flat());
  const highlighted = new Set(highlight ?? []);
  for (const p of layoutChart(chart)) {
    const dot = svgEl("circle", { cx: p.x, cy: p.y, r: 7, class: "dot" });
    if (highlighted.has(p.label)) {
      dot.setAttribute("fill", tintColor(palette, "desired"));
      dot.setAttribute("stroke", "#000");
    } else if (desiredMembers.has(p.label)) {
      dot.setAttribute("fill", tintColor(palette, "desired"));
    } else {
      dot.setAttribute("fill", tintColor(palette, "plain"));
    }
    svg.appendChild(dot);
    const text = svgEl("text", { x: p.x, y: height_px - 4, class: "dot-label" });
    text.textContent = p.label;
    svg.appendChild(text);
  }
  if (polygonPath) {
    svg.appendChild(svgEl("path", { d: polygonPath, class: "lasso-path" }));
  }
  container.appendChild(svg);
  return svg;
}

function renderTile(
  chart: ChartDoc,
  tile: GalleryTile,
  palette: Palette,
): HTMLElement {
  const { width_px, height_px } = chart.plot;
  const wrap = document.createElement("div");
  wrap.className = `tile tile-${tile.tint}`;
  wrap.style.borderColor = tintColor(palette, tile.tint);
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width_px} ${height_px}`,
    class: "mini",
  });
  const members = new Set(tile.members);
  for (const p of layoutChart(chart)) {
    svg.appendChild(
      svgEl("circle", {
        cx: p.x,
        cy: p.y,
        r: 10,
        fill: members.has(p.label) ? tintColor(palette, tile.tint) : "#cccccc",
      }),
    );
  }
  wrap.appendChild(svg);
  const caption = document.createElement("div");
  caption.className = "tile-caption";
  caption.textContent = `${tile.members.join("")} · ${tile.probLabel}`;
  wrap.appendChild(caption);
  return wrap;
}

export function renderGallery(
  container: HTMLElement,
  chart: ChartDoc,
  model: GalleryModel,
  palette: Palette,
  onHover?: (members: string[] | null) => void,
): void {
  container.replaceChildren();
  if (model.empty) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No data-induced groups to show.";
    container.appendChild(empty);
    return;
  }
  for (const section of model.sections) {
    const heading = document.createElement("h3");
    heading.id = `size-${section.size}`;
    heading.textContent = `${section.size}-point groups`;
    container.appendChild(heading);
    const grid = document.createElement("div");
    grid.className = "tile-grid";
    for (const tile of section.tiles) {
      const el = renderTile(chart, tile, palette);
      if (onHover) {
        el.addEventListener("mouseenter", () => onHover(tile.members));
        el.addEventListener("mouseleave", () => onHover(null));
      }
      grid.appendChild(el);
    }
    container.appendChild(grid);
  }
  if (model.missed.length > 0) {
    const heading = document.createElement("h3");
    heading.textContent = "Desired but not detected";
    container.appendChild(heading);
    const strip = document.createElement("div");
    strip.className = "tile-grid missed-strip";
    for (const tile of model.missed) {
      strip.appendChild(renderTile(chart, tile, palette));
    }
    container.appendChild(strip);
  }
}

export function renderResults(
  container: HTMLElement,
  results: PermutationScoreDoc[],
  active: string[] | null,
  onPick: (result: PermutationScoreDoc) => void,
): void {
  container.replaceChildren();
  if (results.length === 0) {
    return;
  }
  const list = document.createElement("ol");
  list.className = "results";
  for (const result of results) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.type = "button";
    button.className = "result-button";
    if (active && active.join() === result.order.join()) {
      button.classList.add("active");
    }
    button.textContent =
      `${result.order.join(" ")}  —  s ${result.s.toFixed(3)} ` +
      `(desired ${result.s_d.toFixed(2)}, violations ${result.s_v})`;
    button.addEventListener("click", () => onPick(result));
    item.appendChild(button);
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderLandscape(
  container: HTMLElement,
  model: HeatmapModel | null,
  onCell: (cell: LandscapeCellDoc) => void,
): void {
  container.replaceChildren();
  if (!model) {
    return;
  }
  const table = document.createElement("table");
  table.className = "landscape";
  const head = document.createElement("tr");
  head.appendChild(document.createElement("th"));
  for (const v of model.violationLevels) {
    const th = document.createElement("th");
    th.textContent = String(v);
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of model.rows) {
    const tr = document.createElement("tr");
    const th = document.createElement("th");
    th.textContent = String(row.desiredMet);
    tr.appendChild(th);
    for (const cell of row.cells) {
      const td = document.createElement("td");
      if (cell) {
        td.textContent = String(cell.count);
        const strength = cell.count / model.maxCount;
        td.style.background = `rgba(33, 102, 172, ${0.15 + 0.65 * strength})`;
        td.className = "landscape-cell";
        td.addEventListener("click", () => onCell(cell));
      }
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  const caption = document.createElement("p");
  caption.className = "landscape-caption";
  caption.textContent =
    `${model.total} permutations — columns: violations, rows: desired groups met`;
  container.appendChild(caption);
  container.appendChild(table);
}
