"""Exhaustive search over valid x-axis orders for a better chart.

Each candidate permutation is re-diagnosed and scored

    s = alpha * s_d - (1 - alpha) * s_v

where s_d sums the probabilities of desired groups that were detected and
s_v counts detected violations. With a category hierarchy, only orders that
keep each category's members contiguous are valid. The search is exhaustive
by design and refuses charts whose valid-order count exceeds the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import chain, permutations, product
from typing import Callable, Iterable, Iterator, Sequence

from .chart import Chart, ChartError, apply_permutation
from .diagnose import (
    DEFAULT_EPSILON_LINE,
    DEFAULT_THRESHOLD,
    DiagnosisReport,
    diagnose,
)
from .geometry import Group
from .model import GroupingModel

DEFAULT_BUDGET = math.factorial(10)
DEFAULT_ALPHA = 0.7
EXEMPLARS_PER_CELL = 3


class BudgetExceeded(ValueError):
    """Search space too large for exhaustive enumeration."""


@dataclass(frozen=True)
class PermutationScore:
    order: tuple[str, ...]
    s: float
    s_d: float
    s_v: int
    desired_met: int
    report: DiagnosisReport

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "s": self.s,
            "s_d": self.s_d,
            "s_v": self.s_v,
            "desired_met": self.desired_met,
            "report": self.report.to_dict(),
        }


@dataclass(frozen=True)
class LandscapeCell:
    violations: int
    desired_met: int
    count: int
    exemplars: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class LandscapeMatrix:
    cells: tuple[LandscapeCell, ...]
    total: int

    def cell(self, violations: int, desired_met: int) -> LandscapeCell | None:
        for c in self.cells:
            if c.violations == violations and c.desired_met == desired_met:
                return c
        return None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "cells": [
                {
                    "violations": c.violations,
                    "desired_met": c.desired_met,
                    "count": c.count,
                    "exemplars": [list(e) for e in c.exemplars],
                }
                for c in self.cells
            ],
        }


def _hierarchy_valid(chart: Chart, order: Sequence[str]) -> bool:
    if chart.hierarchy is None:
        return True
    pos = {lbl: i for i, lbl in enumerate(order)}
    for cat in chart.hierarchy:
        slots = sorted(pos[m] for m in cat.members)
        if slots[-1] - slots[0] != len(slots) - 1:
            return False
    return True


def valid_permutations(
    chart: Chart, allowed_orders: Iterable[Sequence[str]] | None = None
) -> Iterator[tuple[str, ...]]:
    """All label orders satisfying the hierarchy constraint.

    Without a hierarchy this is every permutation; with one, whole categories
    are permuted and members permuted within each category. An explicit
    allow-list narrows the space further (entries must still be valid).
    """
    if allowed_orders is not None:
        label_set = sorted(chart.labels)
        for order in allowed_orders:
            order = tuple(order)
            if sorted(order) != label_set:
                raise ChartError(f"allow-list entry is not a permutation: {order}")
            if _hierarchy_valid(chart, order):
                yield order
        return
    if chart.hierarchy is None:
        yield from permutations(chart.labels)
        return
    for cat_order in permutations(chart.hierarchy):
        member_spaces = [permutations(cat.members) for cat in cat_order]
        for member_orders in product(*member_spaces):
            yield tuple(chain.from_iterable(member_orders))


def count_valid_permutations(chart: Chart) -> int:
    if chart.hierarchy is None:
        return math.factorial(len(chart.points))
    count = math.factorial(len(chart.hierarchy))
    for cat in chart.hierarchy:
        count *= math.factorial(len(cat.members))
    return count


def score_permutation(
    chart: Chart,
    order: Sequence[str],
    desired: Sequence[Group],
    model: GroupingModel,
    alpha: float = DEFAULT_ALPHA,
    threshold: float = DEFAULT_THRESHOLD,
    epsilon_line: float = DEFAULT_EPSILON_LINE,
) -> PermutationScore:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    permuted = apply_permutation(chart, order)
    report = diagnose(permuted, desired, model, threshold=threshold, epsilon_line=epsilon_line)
    detected = {d.group: d.prob for d in report.detected}
    s_d = 0.0
    met = 0
    for g in desired:
        if g in detected:
            s_d += detected[g]
            met += 1
    s_v = sum(1 for d in report.detected if d.violation)
    s = alpha * s_d - (1.0 - alpha) * s_v
    return PermutationScore(
        order=tuple(order), s=s, s_d=s_d, s_v=s_v, desired_met=met, report=report
    )


def _check_budget(chart: Chart, budget: int, allowed) -> int:
    total = count_valid_permutations(chart)
    if allowed is None and total > budget:
        raise BudgetExceeded(
            f"{total} valid permutations exceed the exhaustive-search budget "
            f"({budget}); add hierarchy constraints to shrink the space"
        )
    return total


@dataclass(frozen=True)
class RedesignResult:
    results: tuple[PermutationScore, ...]
    examined: int

    def best(self) -> PermutationScore:
        return self.results[0]


def redesign(
    chart: Chart,
    desired: Sequence[Group],
    model: GroupingModel,
    alpha: float = DEFAULT_ALPHA,
    k: int = 5,
    threshold: float = DEFAULT_THRESHOLD,
    epsilon_line: float = DEFAULT_EPSILON_LINE,
    budget: int = DEFAULT_BUDGET,
    allowed_orders: Iterable[Sequence[str]] | None = None,
    progress: Callable[[int, int], None] | None = None,
    progress_every: int = 64,
) -> RedesignResult:
    """Score every valid order, return the top k.

    Ties on s break toward fewer violations, then more desired groups met,
    then lexicographically earlier order, so results are reproducible.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    total = _check_budget(chart, budget, allowed_orders)
    scored: list[PermutationScore] = []
    examined = 0
    for order in valid_permutations(chart, allowed_orders):
        scored.append(
            score_permutation(
                chart, order, desired, model,
                alpha=alpha, threshold=threshold, epsilon_line=epsilon_line,
            )
        )
        examined += 1
        if progress is not None and examined % progress_every == 0:
            progress(examined, total)
    if progress is not None:
        progress(examined, total)
    scored.sort(key=lambda p: (-p.s, p.s_v, -p.desired_met, p.order))
    return RedesignResult(results=tuple(scored[:k]), examined=examined)


def landscape(
    chart: Chart,
    desired: Sequence[Group],
    model: GroupingModel,
    threshold: float = DEFAULT_THRESHOLD,
    epsilon_line: float = DEFAULT_EPSILON_LINE,
    budget: int = DEFAULT_BUDGET,
    allowed_orders: Iterable[Sequence[str]] | None = None,
    exemplars_per_cell: int = EXEMPLARS_PER_CELL,
) -> LandscapeMatrix:
    """Bucket every valid order by (violations, desired groups met)."""
    _check_budget(chart, budget, allowed_orders)
    counts: dict[tuple[int, int], int] = {}
    exemplars: dict[tuple[int, int], list[tuple[str, ...]]] = {}
    total = 0
    for order in valid_permutations(chart, allowed_orders):
        # alpha plays no role in the bucket coordinates
        ps = score_permutation(
            chart, order, desired, model,
            alpha=1.0, threshold=threshold, epsilon_line=epsilon_line,
        )
        key = (ps.s_v, ps.desired_met)
        counts[key] = counts.get(key, 0) + 1
        bucket = exemplars.setdefault(key, [])
        if len(bucket) < exemplars_per_cell:
            bucket.append(ps.order)
        total += 1
    cells = tuple(
        LandscapeCell(
            violations=v, desired_met=m, count=counts[(v, m)],
            exemplars=tuple(exemplars[(v, m)]),
        )
        for v, m in sorted(counts)
    )
    return LandscapeMatrix(cells=cells, total=total)
