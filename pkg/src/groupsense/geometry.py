"""Geometry features of a candidate group within a chart.

Wraps the numeric kernels with validated, typed entry points. A candidate
group g is a set of point labels; every feature compares g against the
complement r of the remaining points, in pixel space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .chart import Chart, PlotGeometry, layout
from .kernels import FEATURE_NAMES, N_FEATURES


class GroupError(ValueError):
    """Raised for groups that are invalid for their chart."""


@dataclass(frozen=True, order=True)
class Group:
    """An unordered set of point labels, 2 <= size <= n-1 for its chart."""

    members: tuple[str, ...]

    def __init__(self, members: Iterable[str]):
        object.__setattr__(self, "members", tuple(sorted(set(members))))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, label: str) -> bool:
        return label in self.members

    def is_strict_subset(self, other: "Group") -> bool:
        return set(self.members) < set(other.members)

    def validate(self, chart: Chart) -> None:
        n = len(chart.points)
        if not 2 <= len(self.members) <= n - 1:
            raise GroupError(
                f"group size {len(self.members)} outside [2, {n - 1}] for this chart"
            )
        known = set(chart.labels)
        for m in self.members:
            if m not in known:
                raise GroupError(f"group member {m!r} not in chart")


@dataclass(frozen=True)
class FeatureVector:
    slope: float
    error: float
    x_sep: float
    y_sep: float
    cvx_overlap: float
    centroid_distance: float
    centroid_diameter: float
    centroid_ratio: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES])

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in FEATURE_NAMES}

    @classmethod
    def from_array(cls, row: Sequence[float]) -> "FeatureVector":
        if len(row) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} features, got {len(row)}")
        return cls(*(float(v) for v in row))

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureVector":
        return cls(**{name: float(doc[name]) for name in FEATURE_NAMES})


def _as_xy_arrays(points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a sequence of (x, y) pairs")
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def linear_fit(group_pixels: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """OLS line through the points; returns (slope, sum of |residuals|)."""
    xs, ys = _as_xy_arrays(group_pixels)
    if xs.shape[0] < 2:
        raise ValueError("need at least 2 points to fit a line")
    if np.all(xs == xs[0]):
        raise ValueError("undefined slope: all x coordinates equal")
    slope, err = kernels.fit_line(xs, ys)
    return float(slope), float(err)


def cluster_features(
    g_pixels: Sequence[tuple[float, float]],
    r_pixels: Sequence[tuple[float, float]],
    plot: PlotGeometry,
) -> tuple[float, float, float, float, float]:
    """(centroid_distance, centroid_diameter, centroid_ratio, x_sep, y_sep)."""
    gx, gy = _as_xy_arrays(g_pixels)
    rx, ry = _as_xy_arrays(r_pixels)
    if gx.shape[0] == 0 or rx.shape[0] == 0:
        raise ValueError("both point sets must be non-empty")
    cg = np.array([gx.mean(), gy.mean()])
    cr = np.array([rx.mean(), ry.mean()])
    dist = float(np.linalg.norm(cg - cr)) / plot.diagonal
    diam = float(np.mean(np.hypot(gx - cg[0], gy - cg[1])))
    min_d, x_sep, y_sep = kernels.separations(gx, gy, rx, ry)
    if diam == 0.0:
        raise ValueError("degenerate group: all points coincide")
    return dist, diam, float(min_d) / diam, float(x_sep), float(y_sep)


def convex_hull_overlap(
    g_pixels: Sequence[tuple[float, float]],
    r_pixels: Sequence[tuple[float, float]],
) -> float:
    """Hull intersection area over hull union area, in [0, 1]."""
    gx, gy = _as_xy_arrays(g_pixels)
    rx, ry = _as_xy_arrays(r_pixels)
    if gx.shape[0] == 0 or rx.shape[0] == 0:
        raise ValueError("both point sets must be non-empty")
    return float(kernels.hull_overlap(gx, gy, rx, ry))


def group_masks(chart: Chart, groups: Sequence[Group]) -> np.ndarray:
    index = chart.label_index()
    masks = np.zeros((len(groups), len(chart.points)), dtype=np.bool_)
    for row, g in enumerate(groups):
        g.validate(chart)
        for lbl in g.members:
            masks[row, index[lbl]] = True
    return masks


def feature_matrix(chart: Chart, groups: Sequence[Group]) -> np.ndarray:
    """(len(groups), 8) feature matrix in canonical order."""
    lay = layout(chart)
    masks = group_masks(chart, groups)
    return kernels.features_batch(
        lay.xs, lay.ys, masks, chart.plot.width_px, chart.plot.height_px
    )


def feature_vector(chart: Chart, group: Group) -> FeatureVector:
    """All eight features of one candidate group."""
    row = feature_matrix(chart, [group])[0]
    return FeatureVector.from_array(row)
