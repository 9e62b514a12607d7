"""Detect the groups a viewer is likely to perceive in a chart.

diagnose() scores every candidate subset of points (sizes 2..n-1) with a
grouping model, keeps those at or above the probability threshold, prunes
co-linear groups that are strict subsets of detected co-linear supersets,
and flags every detected group that is not among the designer's desired
groups as a violation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .chart import Chart, ChartError, chart_id
from .geometry import FeatureVector, Group, feature_matrix
from .kernels import ERROR
from .model import GroupingModel, predict_batch

DEFAULT_THRESHOLD = 0.9
DEFAULT_EPSILON_LINE = 4.0  # px of summed |residuals| under which a group counts as a line


@dataclass(frozen=True)
class DetectedGroup:
    group: Group
    prob: float
    violation: bool
    colinear: bool


@dataclass(frozen=True)
class DiagnosisReport:
    chart_id: str
    desired: tuple[Group, ...]
    detected: tuple[DetectedGroup, ...]
    missed_desired: tuple[Group, ...]
    threshold: float
    model_version: str

    def detected_groups(self) -> set[Group]:
        return {d.group for d in self.detected}

    def violations(self) -> tuple[DetectedGroup, ...]:
        return tuple(d for d in self.detected if d.violation)

    def to_dict(self) -> dict:
        return {
            "chart_id": self.chart_id,
            "desired": [list(g.members) for g in self.desired],
            "detected": [
                {
                    "members": list(d.group.members),
                    "prob": d.prob,
                    "violation": d.violation,
                    "colinear": d.colinear,
                }
                for d in self.detected
            ],
            "missed_desired": [list(g.members) for g in self.missed_desired],
            "threshold": self.threshold,
            "model_version": self.model_version,
        }


def enumerate_candidates(chart: Chart) -> list[Group]:
    """Every subset of sizes 2..n-1, in (size, point-order) canonical order."""
    n = len(chart.points)
    if n < 3:
        raise ChartError("candidate enumeration needs a chart with >= 3 points")
    labels = chart.labels
    out = []
    for size in range(2, n):
        for combo in combinations(range(n), size):
            out.append(Group(labels[i] for i in combo))
    return out


def is_colinear(features: FeatureVector, epsilon_line: float = DEFAULT_EPSILON_LINE) -> bool:
    """Closed threshold: error == epsilon still counts as co-linear."""
    return features.error <= epsilon_line


def _prune_keep_mask(
    groups: Sequence[Group], detected: np.ndarray, colinear: np.ndarray
) -> np.ndarray:
    """Drop detected co-linear groups that are strict subsets of another
    detected co-linear group. Non-co-linear groups are never pruned."""
    keep = detected.copy()
    live = [i for i in range(len(groups)) if detected[i] and colinear[i]]
    for i in live:
        for j in live:
            if i != j and groups[i].is_strict_subset(groups[j]):
                keep[i] = False
                break
    return keep


def diagnose(
    chart: Chart,
    desired: Sequence[Group],
    model: GroupingModel,
    threshold: float = DEFAULT_THRESHOLD,
    epsilon_line: float = DEFAULT_EPSILON_LINE,
) -> DiagnosisReport:
    for g in desired:
        g.validate(chart)
    candidates = enumerate_candidates(chart)
    feats = feature_matrix(chart, candidates)
    sizes = np.array([len(g) for g in candidates])
    probs = predict_batch(model, feats, sizes, len(chart.points))

    detected_mask = probs >= threshold
    colinear_mask = feats[:, ERROR] <= epsilon_line
    keep = _prune_keep_mask(candidates, detected_mask, colinear_mask)

    desired_set = set(desired)
    detected = [
        DetectedGroup(
            group=candidates[i],
            prob=float(probs[i]),
            violation=candidates[i] not in desired_set,
            colinear=bool(colinear_mask[i]),
        )
        for i in np.nonzero(keep)[0]
    ]
    detected.sort(key=lambda d: (len(d.group), -d.prob, d.group.members))

    detected_groups = {d.group for d in detected}
    missed = tuple(g for g in desired if g not in detected_groups)
    return DiagnosisReport(
        chart_id=chart_id(chart),
        desired=tuple(desired),
        detected=tuple(detected),
        missed_desired=missed,
        threshold=threshold,
        model_version=model.model_id,
    )
