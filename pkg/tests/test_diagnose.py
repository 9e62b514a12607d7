import numpy as np
import pytest

from groupsense import (
    Group,
    apply_permutation,
    diagnose,
    enumerate_candidates,
    feature_vector,
    generate_random_chart,
    is_colinear,
    predict,
)
from groupsense.chart import Chart, Point
from groupsense.geometry import FeatureVector
from groupsense.kernels import FEATURE_NAMES
from groupsense.model import DecisionTree, GroupingModel, TreeNode


def fv(**overrides):
    vals = {name: 0.0 for name in FEATURE_NAMES}
    vals.update(overrides)
    return FeatureVector(**vals)


def error_threshold_model(threshold=4.5, p_low=0.95, p_high=0.05):
    """Detects tight lines: error < threshold scores p_low."""
    tree = DecisionTree(
        nodes=(
            TreeNode(feature="error", threshold=threshold, left=1, right=2),
            TreeNode(prob=p_low),
            TreeNode(prob=p_high),
        )
    )
    return GroupingModel(kind="tree", feature_policy=("error",), tree=tree)


def colinear_fixture():
    """Four points on an exact line (values in arithmetic progression) plus
    two far-off outliers."""
    values = [90.0, 70.0, 50.0, 30.0, 95.0, 5.0]
    return Chart(points=tuple(Point(l, v) for l, v in zip("ABCDEF", values)))


class TestEnumerateCandidates:
    def test_six_points_give_56(self, chart6):
        cands = enumerate_candidates(chart6)
        assert len(cands) == 56
        by_size = {s: sum(1 for g in cands if len(g) == s) for s in (2, 3, 4, 5)}
        assert by_size == {2: 15, 3: 20, 4: 15, 5: 6}

    def test_three_points_give_3_pairs(self):
        chart = generate_random_chart(3, seed=0)
        cands = enumerate_candidates(chart)
        assert len(cands) == 3
        assert all(len(g) == 2 for g in cands)

    def test_no_duplicates_no_full_set(self, chart6):
        cands = enumerate_candidates(chart6)
        assert len(set(cands)) == len(cands)
        assert all(len(g) < 6 for g in cands)

    def test_small_chart_rejected(self):
        with pytest.raises(ValueError):
            enumerate_candidates(generate_random_chart(2, seed=0))


class TestIsColinear:
    def test_exact_line(self):
        assert is_colinear(fv(error=0.0)) is True

    def test_far_above_epsilon(self):
        assert is_colinear(fv(error=100.0)) is False

    def test_boundary_inclusive(self):
        assert is_colinear(fv(error=4.0)) is True
        assert is_colinear(fv(error=4.0 + 1e-9)) is False

    def test_custom_epsilon(self):
        assert is_colinear(fv(error=7.0), epsilon_line=7.0) is True


class TestDiagnose:
    def test_colinear_pruning(self):
        chart = colinear_fixture()
        report = diagnose(chart, [], error_threshold_model(), threshold=0.9)
        line = Group(["A", "B", "C", "D"])
        detected = report.detected_groups()
        assert line in detected
        # no strict co-linear subset of a detected co-linear group survives
        colinear_detected = [d for d in report.detected if d.colinear]
        for d in colinear_detected:
            for e in colinear_detected:
                assert not d.group.is_strict_subset(e.group)
        # in particular none of the sub-lines
        for sub in (Group(["A", "B"]), Group(["A", "B", "C"]), Group(["B", "C", "D"])):
            assert sub not in detected

    def test_pruning_never_removes_non_colinear(self, chart6, model):
        report = diagnose(chart6, [], model, threshold=0.5)
        # recompute the raw detection set and check only colinear ones vanished
        cands = enumerate_candidates(chart6)
        raw = {
            g
            for g in cands
            if predict(model, feature_vector(chart6, g), len(g), 6) >= 0.5
        }
        pruned_away = raw - report.detected_groups()
        for g in pruned_away:
            assert is_colinear(feature_vector(chart6, g))

    def test_desired_detected_not_violations(self):
        chart = colinear_fixture()
        line = Group(["A", "B", "C", "D"])
        report = diagnose(chart, [line], error_threshold_model(), threshold=0.9)
        by_group = {d.group: d for d in report.detected}
        assert by_group[line].violation is False
        assert all(d.violation for g, d in by_group.items() if g != line)

    def test_desired_equal_detected_means_no_violations(self):
        chart = colinear_fixture()
        base = diagnose(chart, [], error_threshold_model(), threshold=0.9)
        desired = sorted(base.detected_groups())
        report = diagnose(chart, desired, error_threshold_model(), threshold=0.9)
        assert report.violations() == ()
        assert report.missed_desired == ()

    def test_vacuous_threshold(self, chart6):
        desired = [Group(["A", "B"]), Group(["C", "D", "E"])]
        report = diagnose(chart6, desired, error_threshold_model(), threshold=1.0)
        assert report.detected == ()
        assert set(report.missed_desired) == set(desired)

    def test_detected_probs_at_or_above_threshold(self, chart6, model):
        report = diagnose(chart6, [], model, threshold=0.9)
        for d in report.detected:
            assert d.prob >= 0.9
            recomputed = predict(model, feature_vector(chart6, d.group), len(d.group), 6)
            assert recomputed == d.prob

    def test_desired_covered_exactly_once(self, chart6, model):
        desired = [Group(["A", "B"]), Group(["A", "C", "E"]), Group(["D", "F"])]
        report = diagnose(chart6, desired, model)
        detected = report.detected_groups()
        for g in desired:
            assert (g in detected) != (g in report.missed_desired)

    def test_mirror_diagnosis_identical(self, model):
        for seed in range(8):
            chart = generate_random_chart(6, seed=seed)
            mirrored = apply_permutation(chart, tuple(reversed(chart.labels)))
            desired = [Group(["A", "B"])]
            a = diagnose(chart, desired, model)
            b = diagnose(mirrored, desired, model)
            assert [(d.group, d.prob, d.violation, d.colinear) for d in a.detected] == [
                (d.group, d.prob, d.violation, d.colinear) for d in b.detected
            ]
            assert a.missed_desired == b.missed_desired

    def test_sorted_by_size_then_prob(self, chart6, model):
        report = diagnose(chart6, [], model, threshold=0.5)
        keys = [(len(d.group), -d.prob) for d in report.detected]
        assert keys == sorted(keys)

    def test_report_serialization(self, chart6, model):
        report = diagnose(chart6, [Group(["A", "B"])], model)
        doc = report.to_dict()
        assert doc["threshold"] == 0.9
        assert doc["model_version"] == "default-v1"
        assert isinstance(doc["detected"], list)
        assert doc["desired"] == [["A", "B"]]

    def test_invalid_desired_rejected(self, chart6, model):
        from groupsense import GroupError

        with pytest.raises(GroupError):
            diagnose(chart6, [Group(["A"])], model)
