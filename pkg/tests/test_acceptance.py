"""Acceptance suite: one test per primary criterion, each printing a
PASS line with its measured numbers (run with -s to see them).
"""

import itertools
import json
import time

import numpy as np
import pytest

from groupsense import (
    Group,
    apply_permutation,
    diagnose,
    enumerate_candidates,
    feature_matrix,
    generate_random_chart,
    landscape,
    predict,
    redesign,
    valid_permutations,
)
from groupsense.chart import Category, Chart, Point, layout
from groupsense.geometry import FeatureVector, group_masks
from groupsense.kernels import FEATURE_NAMES
from groupsense.model import predict_batch
from groupsense.redesign import count_valid_permutations
from groupsense.training import (
    LabeledExample,
    compute_vif,
    make_synthetic_dataset,
    oracle_label,
    shap_exact,
    split_dataset,
    synthesize_negatives,
    train_decision_tree,
    train_logistic,
    tree_model,
    evaluate,
    vif_prune,
)

from oracle import oracle_feature_row


def ok(name, detail):
    print(f"PASS {name}: {detail}")


def fv(**overrides):
    vals = {name: 0.0 for name in FEATURE_NAMES}
    vals.update(overrides)
    return FeatureVector(**vals)


def test_feature_oracle_equivalence():
    """All eight features match an independent geometric oracle to 1e-9
    on 200 seeded charts x 56 candidate groups, in under 10 s."""
    t0 = time.monotonic()
    worst = 0.0
    for seed in range(200):
        chart = generate_random_chart(6, seed=seed)
        lay = layout(chart)
        candidates = enumerate_candidates(chart)
        feats = feature_matrix(chart, candidates)
        masks = group_masks(chart, candidates)
        for row, mask in zip(feats, masks):
            expected = oracle_feature_row(
                lay.xs, lay.ys, mask, chart.plot.width_px, chart.plot.height_px
            )
            worst = max(worst, float(np.max(np.abs(row - expected))))
    elapsed = time.monotonic() - t0
    assert worst < 1e-9, f"max feature deviation {worst}"
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    ok("feature-oracle equivalence",
       f"11200 groups, max |dev| {worst:.2e}, {elapsed:.1f}s")


def test_candidate_counts():
    chart6 = generate_random_chart(6, seed=0)
    chart3 = generate_random_chart(3, seed=0)
    n6 = len(enumerate_candidates(chart6))
    n3 = len(enumerate_candidates(chart3))
    assert n6 == 56
    assert n3 == 3
    ok("candidate counts", f"n=6 -> {n6}, n=3 -> {n3}")


def test_permutation_counts(model):
    chart = generate_random_chart(6, seed=1)
    n_free = sum(1 for _ in valid_permutations(chart))
    assert n_free == 720

    pts = tuple(Point(l, v) for l, v in zip("ABCDEF", [15.0, 35.0, 55.0, 75.0, 25.0, 95.0]))
    cats = (
        Category("g1", ("A", "B")),
        Category("g2", ("C", "D")),
        Category("g3", ("E", "F")),
    )
    hier = Chart(points=pts, hierarchy=cats)
    got = set(valid_permutations(hier))
    # independent filter oracle over all 720 orders
    def contiguous(order, members):
        slots = sorted(order.index(m) for m in members)
        return slots[-1] - slots[0] == len(slots) - 1
    expected = {
        p for p in itertools.permutations(hier.labels)
        if all(contiguous(p, c.members) for c in cats)
    }
    assert got == expected and len(got) == 48

    land_free = landscape(chart, [Group(["A", "B"])], model)
    land_hier = landscape(hier, [Group(["A", "B"])], model)
    assert sum(c.count for c in land_free.cells) == land_free.total == 720
    assert sum(c.count for c in land_hier.cells) == land_hier.total == 48
    ok("permutation counts", "720 free / 48 hierarchy-constrained; landscape sums match")


def test_redesign_optimality(model):
    """redesign(k=1) matches an independent brute force that re-applies every
    permutation and re-diagnoses, over 25 seeded fixtures, within 60 s."""
    t0 = time.monotonic()
    alpha = 0.7
    for seed in range(25):
        chart = generate_random_chart(6, seed=1000 + seed)
        desired = [Group(["A", "B"]), Group(["D", "E", "F"])]
        got = redesign(chart, desired, model, alpha=alpha, k=1).best().s

        best = -np.inf
        for order in itertools.permutations(chart.labels):
            rep = diagnose(apply_permutation(chart, order), desired, model)
            det = {d.group: d.prob for d in rep.detected}
            s_d = sum(det[g] for g in desired if g in det)
            s_v = sum(1 for d in rep.detected if d.violation)
            best = max(best, alpha * s_d - (1 - alpha) * s_v)
        assert got == best, f"seed {seed}: redesign {got} != brute force {best}"
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    ok("redesign optimality", f"25 fixtures match brute force, {elapsed:.1f}s")


def test_mirror_symmetry(model):
    """Slope-free default model: diagnosis is x-reversal invariant and
    redesign scores pair up between each order and its reversal."""
    assert not model.uses_feature("slope")
    for seed in range(25):
        chart = generate_random_chart(6, seed=2000 + seed)
        mirrored = apply_permutation(chart, tuple(reversed(chart.labels)))
        desired = [Group(["A", "B"])]
        a = diagnose(chart, desired, model)
        b = diagnose(mirrored, desired, model)
        assert [(d.group, d.prob) for d in a.detected] == [
            (d.group, d.prob) for d in b.detected
        ]
    for seed in range(3):
        chart = generate_random_chart(6, seed=2100 + seed)
        desired = [Group(["A", "B"]), Group(["C", "D"])]
        scores = {
            p.order: p.s for p in redesign(chart, desired, model, k=720).results
        }
        assert len(scores) == 720
        for order, s in scores.items():
            assert scores[tuple(reversed(order))] == s
    ok("mirror symmetry", "25 mirrored diagnoses identical; 3x720 scores pair up")


def test_colinear_pruning(model):
    """Four exactly co-linear points + two outliers: no strict co-linear
    subset of a detected co-linear group survives."""
    values = [90.0, 70.0, 50.0, 30.0, 95.0, 5.0]  # A-D on a line, E/F off it
    chart = Chart(points=tuple(Point(l, v) for l, v in zip("ABCDEF", values)))
    report = diagnose(chart, [], model, threshold=0.9)
    line = Group(["A", "B", "C", "D"])
    detected = report.detected_groups()
    assert line in detected, "the 4-point line itself must be detected"
    colinear = [d for d in report.detected if d.colinear]
    for d in colinear:
        for e in colinear:
            assert not d.group.is_strict_subset(e.group), (
                f"{d.group.members} is a pruned-subset of {e.group.members}"
            )
    for sub_size in (2, 3):
        for sub in itertools.combinations("ABCD", sub_size):
            assert Group(sub) not in detected
    ok("co-linear pruning", f"line detected, {len(colinear)} co-linear survivors, no nesting")


def test_synthetic_training_pipeline():
    """Depth-3 tree on 5000 oracle-labeled examples (70/20/10): holdout
    F1 >= 0.95; depth cap enforced; precision/recall reported."""
    examples = make_synthetic_dataset(5000, seed=11, balance=0.5)
    train, test, holdout = split_dataset(examples, seed=11)
    assert (len(train), len(test), len(holdout)) == (3500, 1000, 500)
    tree = train_decision_tree(train, max_depth=3)
    assert tree.depth() <= 3
    report = evaluate(tree_model(tree), holdout)
    assert report.f1 >= 0.95, f"holdout F1 {report.f1:.3f}"
    ok("synthetic training pipeline",
       f"split 3500/1000/500, depth {tree.depth()}, holdout "
       f"P={report.precision:.3f} R={report.recall:.3f} F1={report.f1:.3f} "
       f"(P >= R: {report.precision >= report.recall})")


def test_shap_correctness(model):
    """Efficiency, dummy, and symmetry on 100 instances; exact enumeration
    over 2^8 coalitions in under 1 s per instance."""
    data = make_synthetic_dataset(160, seed=12)
    background = [ex.features for ex in data[:40]]
    instances = data[40:140]
    assert len(instances) == 100
    assert not model.uses_feature("slope")
    t0 = time.monotonic()
    worst_eff = 0.0
    for ex in instances:
        exp = shap_exact(model, ex.features, background,
                         group_size=len(ex.group), chart_size=ex.chart_size)
        fx = predict(model, ex.features, len(ex.group), ex.chart_size)
        worst_eff = max(
            worst_eff, abs(exp.base_value + sum(exp.per_feature.values()) - fx)
        )
        assert exp.per_feature["slope"] == 0.0  # dummy: model never reads slope
    per_instance = (time.monotonic() - t0) / 100
    assert worst_eff < 1e-9
    assert per_instance < 1.0, f"{per_instance:.2f}s per instance"

    # symmetry: two features entering identically, swap-symmetric background
    from groupsense.model import LogisticModel
    from groupsense.training import logistic_model

    sym = logistic_model(
        LogisticModel(
            weights={"x_sep": 0.04, "y_sep": 0.04},
            intercept=-1.2,
            included_features=("x_sep", "y_sep"),
        )
    )
    rng = np.random.default_rng(5)
    bg = []
    for _ in range(20):
        a, b = rng.uniform(0, 60, 2)
        bg.append(fv(x_sep=a, y_sep=b))
        bg.append(fv(x_sep=b, y_sep=a))
    exp = shap_exact(sym, fv(x_sep=33.0, y_sep=33.0), bg)
    assert exp.per_feature["x_sep"] == pytest.approx(exp.per_feature["y_sep"], abs=1e-9)
    ok("SHAP correctness",
       f"efficiency <= {worst_eff:.1e}, dummy exact, symmetric phis, "
       f"{per_instance * 1000:.0f} ms/instance")


def test_vif_behavior():
    """Duplicated column always dropped; r=0.8 pair survives threshold 5."""
    n = 64
    u = np.tile([1.0, -1.0], n // 2)
    v = np.tile([1.0, 1.0, -1.0, -1.0], n // 4)

    X_dup = np.column_stack([u, u.copy()])
    kept, dropped = vif_prune(X_dup, ["first", "second"], threshold=5.0)
    assert kept == ["first"]
    assert dropped == [("second", float("inf"))]

    X_corr = np.column_stack([u, 0.8 * u + 0.6 * v])
    r = np.corrcoef(X_corr, rowvar=False)[0, 1]
    assert r == pytest.approx(0.8, abs=1e-12)
    vifs = compute_vif(X_corr, ["a", "b"])
    assert vifs["a"] == pytest.approx(1 / (1 - 0.64), abs=1e-9)
    kept, dropped = vif_prune(X_corr, ["a", "b"], threshold=5.0)
    assert kept == ["a", "b"] and not dropped

    # end to end through train_logistic: duplicate inside real feature columns
    rng = np.random.default_rng(13)
    base = rng.uniform(0, 50, 300)
    X = np.zeros((300, 8))
    X[:, 1] = base            # error
    X[:, 2] = base            # x_sep duplicates error
    X[:, 3] = rng.uniform(0, 40, 300)
    y = base + X[:, 3] > 45
    logit = train_logistic(
        [
            LabeledExample(
                chart_id="v", group=Group(["A", "B"]),
                features=FeatureVector.from_array(row), label=bool(t),
                source="oracle", chart_size=6,
            )
            for row, t in zip(X, y)
        ]
    )
    assert "error" in logit.included_features
    assert "x_sep" not in logit.included_features
    ok("VIF behavior", f"duplicate dropped; r=0.8 pair kept (VIF {vifs['a']:.2f})")


def test_negative_synthesis_soundness():
    """Every emitted synthetic negative re-passes all three criteria under
    independent re-checking."""
    charts = {f"c{i}": generate_random_chart(6, seed=300 + i) for i in range(10)}
    selections = {}
    for cid, chart in charts.items():
        cands = enumerate_candidates(chart)
        feats = feature_matrix(chart, cands)
        order = np.argsort(feats[:, 1])  # tightest-fitting groups get "selected"
        selections[cid] = {cands[order[0]], cands[order[1]], cands[order[2]]}
    negatives = synthesize_negatives(charts, selections)
    assert negatives

    checked = 0
    for ex in negatives:
        chart = charts[ex.chart_id]
        lay = layout(chart)
        mask = group_masks(chart, [ex.group])[0]
        row = oracle_feature_row(lay.xs, lay.ys, mask,
                                 chart.plot.width_px, chart.plot.height_px)
        # criterion 1: never selected
        assert ex.group not in selections[ex.chart_id]
        # criterion 2: strictly worse fit than mean over selected groups
        sel_rows = [
            oracle_feature_row(lay.xs, lay.ys, group_masks(chart, [g])[0],
                               chart.plot.width_px, chart.plot.height_px)
            for g in selections[ex.chart_id]
        ]
        assert row[1] > np.mean([r[1] for r in sel_rows])
        # criterion 3: disjoint hulls
        assert row[4] == 0.0
        checked += 1
    ok("negative-synthesis soundness", f"{checked} negatives re-verified")
