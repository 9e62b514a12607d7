"""Dot plot charts, pixel layout, and randomized chart generation.

A chart is an ordered list of labeled numeric points, an optional category
hierarchy over the labels, and the plot geometry used to place points in
pixel space. All downstream geometry works on the pixel layout produced
here: point i of n sits at the center of x-slot i, and values map linearly
into a padded vertical band (screen y grows downward).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class ChartError(ValueError):
    """Raised when a chart, geometry, or permutation violates an invariant."""


@dataclass(frozen=True)
class PlotGeometry:
    """Plot area in pixels plus the data-value window mapped onto it.

    pad_fraction reserves a band at the top and bottom: value_max maps to
    y = height_px * pad_fraction and value_min to y = height_px * (1 - pad_fraction).
    """

    width_px: float = 400.0
    height_px: float = 300.0
    pad_fraction: float = 0.05
    value_min: float = 0.0
    value_max: float = 100.0

    def __post_init__(self) -> None:
        if not (self.width_px > 0 and self.height_px > 0):
            raise ChartError("plot dimensions must be positive")
        if not (0 <= self.pad_fraction < 0.5):
            raise ChartError("pad_fraction must be in [0, 0.5)")
        if not self.value_min < self.value_max:
            raise ChartError("degenerate value scale: value_min must be < value_max")

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width_px, self.height_px))


@dataclass(frozen=True)
class Point:
    label: str
    value: float


@dataclass(frozen=True)
class Category:
    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class Chart:
    points: tuple[Point, ...]
    hierarchy: tuple[Category, ...] | None = None
    plot: PlotGeometry = field(default_factory=PlotGeometry)

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ChartError("chart needs at least 2 points")
        labels = [p.label for p in self.points]
        if any(not lbl for lbl in labels):
            raise ChartError("point labels must be non-empty")
        if len(set(labels)) != len(labels):
            raise ChartError("point labels must be unique")
        for p in self.points:
            # Keeps every layout coordinate inside the plot area.
            if not (self.plot.value_min <= p.value <= self.plot.value_max):
                raise ChartError(
                    f"value {p.value!r} of point {p.label!r} outside "
                    f"[{self.plot.value_min}, {self.plot.value_max}]"
                )
        if self.hierarchy is not None:
            seen: set[str] = set()
            label_set = set(labels)
            for cat in self.hierarchy:
                for m in cat.members:
                    if m not in label_set:
                        raise ChartError(f"hierarchy member {m!r} not in chart")
                    if m in seen:
                        raise ChartError(f"label {m!r} in more than one category")
                    seen.add(m)
            if seen != label_set:
                missing = sorted(label_set - seen)
                raise ChartError(f"hierarchy does not cover points: {missing}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(p.value for p in self.points)

    def label_index(self) -> dict[str, int]:
        return {p.label: i for i, p in enumerate(self.points)}


@dataclass(frozen=True)
class PixelLayout:
    """Per-point pixel coordinates, same order as the chart's points."""

    xs: np.ndarray
    ys: np.ndarray

    @property
    def coords(self) -> tuple[tuple[float, float], ...]:
        return tuple((float(x), float(y)) for x, y in zip(self.xs, self.ys))


def layout(chart: Chart) -> PixelLayout:
    """Place chart points in pixel space.

    Point i of n gets x = width * (i + 0.5) / n; values map linearly so
    value_max lands at the top pad line and value_min at the bottom one.
    """
    plot = chart.plot
    n = len(chart.points)
    idx = np.arange(n, dtype=np.float64)
    xs = plot.width_px * (idx + 0.5) / n
    values = np.array(chart.values, dtype=np.float64)
    span = plot.value_max - plot.value_min
    band = (1.0 - 2.0 * plot.pad_fraction) * plot.height_px
    ys = plot.pad_fraction * plot.height_px + (plot.value_max - values) / span * band
    xs.flags.writeable = False
    ys.flags.writeable = False
    return PixelLayout(xs=xs, ys=ys)


def _spreadsheet_labels(n: int) -> list[str]:
    # A..Z, then AA, AB, ...
    out = []
    for i in range(n):
        s = ""
        k = i
        while True:
            s = chr(ord("A") + k % 26) + s
            k = k // 26 - 1
            if k < 0:
                break
        out.append(s)
    return out


def generate_random_chart(
    n: int = 6, seed: int = 0, plot: PlotGeometry | None = None
) -> Chart:
    """Random chart in the study's stimulus style: n labeled points with
    values drawn uniformly from [0, 100], no hierarchy, deterministic per seed."""
    if n < 2:
        raise ChartError("need n >= 2 points")
    rng = np.random.default_rng(seed)
    values = rng.uniform(0.0, 100.0, size=n)
    labels = _spreadsheet_labels(n)
    pts = tuple(Point(lbl, float(v)) for lbl, v in zip(labels, values))
    return Chart(points=pts, plot=plot if plot is not None else PlotGeometry())


def apply_permutation(chart: Chart, order: Sequence[str]) -> Chart:
    """Reorder the chart's points to the given label order.

    Values, hierarchy membership, and plot geometry are unchanged; only the
    slot each label occupies moves.
    """
    order = list(order)
    if sorted(order) != sorted(chart.labels) or len(order) != len(chart.points):
        raise ChartError("order must be a permutation of the chart labels")
    by_label = {p.label: p for p in chart.points}
    pts = tuple(by_label[lbl] for lbl in order)
    return Chart(points=pts, hierarchy=chart.hierarchy, plot=chart.plot)


# --- JSON wire format ---------------------------------------------------

def chart_to_dict(chart: Chart) -> dict:
    doc: dict = {
        "points": [{"label": p.label, "value": p.value} for p in chart.points],
        "plot": {
            "width_px": chart.plot.width_px,
            "height_px": chart.plot.height_px,
            "pad_fraction": chart.plot.pad_fraction,
            "value_min": chart.plot.value_min,
            "value_max": chart.plot.value_max,
        },
    }
    if chart.hierarchy is not None:
        doc["hierarchy"] = [
            {"name": c.name, "members": list(c.members)} for c in chart.hierarchy
        ]
    return doc


def chart_from_dict(doc: Mapping) -> Chart:
    try:
        raw_points = doc["points"]
        pts = tuple(Point(str(p["label"]), float(p["value"])) for p in raw_points)
    except (KeyError, TypeError, ValueError) as exc:
        raise ChartError(f"malformed chart points: {exc}") from exc
    hierarchy = None
    if doc.get("hierarchy") is not None:
        try:
            hierarchy = tuple(
                Category(str(c["name"]), tuple(str(m) for m in c["members"]))
                for c in doc["hierarchy"]
            )
        except (KeyError, TypeError) as exc:
            raise ChartError(f"malformed hierarchy: {exc}") from exc
    plot_doc = doc.get("plot") or {}
    try:
        plot = PlotGeometry(
            width_px=float(plot_doc.get("width_px", 400.0)),
            height_px=float(plot_doc.get("height_px", 300.0)),
            pad_fraction=float(plot_doc.get("pad_fraction", 0.05)),
            value_min=float(plot_doc.get("value_min", 0.0)),
            value_max=float(plot_doc.get("value_max", 100.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ChartError(f"malformed plot geometry: {exc}") from exc
    return Chart(points=pts, hierarchy=hierarchy, plot=plot)


def chart_id(chart: Chart) -> str:
    """Content hash of the canonical chart document (stable across field order)."""
    canon = json.dumps(chart_to_dict(chart), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_chart(path) -> Chart:
    with open(path) as fh:
        return chart_from_dict(json.load(fh))


def save_chart(chart: Chart, path) -> None:
    with open(path, "w") as fh:
        json.dump(chart_to_dict(chart), fh, indent=2)
        fh.write("\n")
