"""Training-data construction, model fitting, evaluation, and attribution.

The full modeling pipeline: synthesize clearly-non-group negatives from
selection data, label candidate groups with a configurable oracle when no
human selections are available, split 70/20/10, fit depth-capped CART trees
and VIF-pruned logistic regressions, evaluate with precision/recall/F1 and
stratified cross-validation, and explain predictions with exact Shapley
values over all feature coalitions.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .chart import Chart, chart_id, generate_random_chart, load_chart
from .diagnose import enumerate_candidates
from .geometry import FeatureVector, Group, feature_matrix
from .kernels import CVX_OVERLAP, ERROR, FEATURE_NAMES, N_FEATURES
from .model import (
    CLUSTER_FEATURES,
    COLINEAR_FEATURES,
    GROUP_SIZE,
    MODEL_FEATURES,
    DecisionTree,
    GroupingModel,
    LogisticModel,
    TreeNode,
    predict_batch,
)

# Oracle label thresholds (pixels except the unitless cluster ratio).
TAU_LINE = 4.0
TAU_RATIO = 3.0
TAU_Y = 30.0

SPLIT_FRACTIONS = (0.7, 0.2, 0.1)

SOURCES = ("participant", "synthetic_negative", "oracle")


@dataclass(frozen=True)
class LabeledExample:
    chart_id: str
    group: Group
    features: FeatureVector
    label: bool
    source: str
    chart_size: int = 6

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise ValueError(f"unknown example source {self.source!r}")

    def to_dict(self) -> dict:
        return {
            "chart_id": self.chart_id,
            "members": list(self.group.members),
            "features": self.features.to_dict(),
            "label": self.label,
            "source": self.source,
            "chart_size": self.chart_size,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "LabeledExample":
        return cls(
            chart_id=str(doc["chart_id"]),
            group=Group(doc["members"]),
            features=FeatureVector.from_dict(doc["features"]),
            label=bool(doc["label"]),
            source=str(doc["source"]),
            chart_size=int(doc.get("chart_size", 6)),
        )


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    support: int
    fold_stats: Mapping[str, tuple[float, float]] | None = None
    no_positive_predictions: bool = False

    def to_dict(self) -> dict:
        doc: dict = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "no_positive_predictions": self.no_positive_predictions,
        }
        if self.fold_stats is not None:
            doc["fold_stats"] = {
                k: {"mean": m, "sd": s} for k, (m, s) in self.fold_stats.items()
            }
        return doc


@dataclass(frozen=True)
class ShapExplanation:
    per_feature: Mapping[str, float]
    base_value: float

    def to_dict(self) -> dict:
        return {"per_feature": dict(self.per_feature), "base_value": self.base_value}


# --- dataset plumbing -----------------------------------------------------

def features_of(examples: Sequence[LabeledExample]) -> np.ndarray:
    return np.array([ex.features.as_array() for ex in examples])


def labels_of(examples: Sequence[LabeledExample]) -> np.ndarray:
    return np.array([ex.label for ex in examples], dtype=bool)


def predict_examples(model: GroupingModel, examples: Sequence[LabeledExample]) -> np.ndarray:
    """Model probabilities per example, batching by chart size."""
    probs = np.empty(len(examples))
    by_size: dict[int, list[int]] = {}
    for i, ex in enumerate(examples):
        by_size.setdefault(ex.chart_size, []).append(i)
    for chart_size, idxs in by_size.items():
        feats = np.array([examples[i].features.as_array() for i in idxs])
        sizes = np.array([len(examples[i].group) for i in idxs])
        probs[idxs] = predict_batch(model, feats, sizes, chart_size)
    return probs


def save_examples(examples: Sequence[LabeledExample], path) -> None:
    with open(path, "w") as fh:
        json.dump([ex.to_dict() for ex in examples], fh)
        fh.write("\n")


def load_examples(path) -> list[LabeledExample]:
    with open(path) as fh:
        return [LabeledExample.from_dict(doc) for doc in json.load(fh)]


# --- oracle labels and synthetic data -------------------------------------

def oracle_label(
    features: FeatureVector,
    group_size: int,
    tau_line: float = TAU_LINE,
    tau_ratio: float = TAU_RATIO,
    tau_y: float = TAU_Y,
) -> bool:
    """Synthetic stand-in for a human label: a group reads as a unit when it
    is a tight line of 3+, a well-separated cluster, or split off vertically."""
    if features.error <= tau_line and group_size >= 3:
        return True
    if features.centroid_ratio >= tau_ratio and features.cvx_overlap == 0.0:
        return True
    return features.y_sep >= tau_y


def chart_examples(
    chart: Chart,
    tau_line: float = TAU_LINE,
    tau_ratio: float = TAU_RATIO,
    tau_y: float = TAU_Y,
) -> list[LabeledExample]:
    """Oracle-labeled examples for every candidate group of one chart."""
    candidates = enumerate_candidates(chart)
    feats = feature_matrix(chart, candidates)
    cid = chart_id(chart)
    n = len(chart.points)
    out = []
    for g, row in zip(candidates, feats):
        fv = FeatureVector.from_array(row)
        out.append(
            LabeledExample(
                chart_id=cid,
                group=g,
                features=fv,
                label=oracle_label(fv, len(g), tau_line, tau_ratio, tau_y),
                source="oracle",
                chart_size=n,
            )
        )
    return out


def make_synthetic_dataset(
    n_examples: int,
    seed: int = 0,
    n_points: int = 6,
    balance: float | None = 0.5,
    tau_line: float = TAU_LINE,
    tau_ratio: float = TAU_RATIO,
    tau_y: float = TAU_Y,
) -> list[LabeledExample]:
    """Oracle-labeled examples from seeded random charts.

    With balance set, positives make up that fraction of the result (the
    majority class is subsampled), mirroring the near-balanced study corpus.
    """
    rng = np.random.default_rng(seed)
    pos: list[LabeledExample] = []
    neg: list[LabeledExample] = []
    need = n_examples
    chart_seed = seed
    while True:
        chart_seed += 1
        for ex in chart_examples(
            generate_random_chart(n_points, seed=chart_seed),
            tau_line, tau_ratio, tau_y,
        ):
            (pos if ex.label else neg).append(ex)
        if balance is None:
            if len(pos) + len(neg) >= need:
                break
        else:
            if len(pos) >= math.ceil(need * balance) and len(neg) >= need:
                break
        if chart_seed - seed > 200 * max(1, need // 28):
            raise RuntimeError("synthetic dataset generation did not converge")
    if balance is None:
        out = pos + neg
        rng.shuffle(out)
        return out[:need]
    n_pos = round(need * balance)
    rng.shuffle(pos)
    rng.shuffle(neg)
    out = pos[:n_pos] + neg[: need - n_pos]
    rng.shuffle(out)
    return out


def load_selections(csv_path) -> list[tuple[str, str, Group]]:
    """Rows of the selection CSV: chart_id, participant_id, member_labels
    (semicolon-joined)."""
    out = []
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                (
                    row["chart_id"],
                    row["participant_id"],
                    Group(row["member_labels"].split(";")),
                )
            )
    return out


def load_chart_dir(charts_dir) -> dict[str, Chart]:
    charts = {}
    for path in sorted(Path(charts_dir).glob("*.json")):
        charts[path.stem] = load_chart(path)
    return charts


def participant_examples(
    charts: Mapping[str, Chart],
    selections: Sequence[tuple[str, str, Group]],
) -> list[LabeledExample]:
    """One positive example per selection row."""
    out = []
    for cid, _participant, group in selections:
        chart = charts[cid]
        feats = feature_matrix(chart, [group])[0]
        out.append(
            LabeledExample(
                chart_id=cid,
                group=group,
                features=FeatureVector.from_array(feats),
                label=True,
                source="participant",
                chart_size=len(chart.points),
            )
        )
    return out


def synthesize_negatives(
    charts: Mapping[str, Chart],
    selected_groups: Mapping[str, Iterable[Group]],
) -> list[LabeledExample]:
    """Candidate groups that are clearly not groups: never selected, with a
    linear fit worse than the mean over that chart's selected groups, and a
    convex hull disjoint from the rest of the points.

    Charts without any selections fall back to the global mean fit error.
    """
    chart_sel = {cid: set(groups) for cid, groups in selected_groups.items()}
    sel_errors: dict[str, np.ndarray] = {}
    all_errors: list[float] = []
    for cid, groups in chart_sel.items():
        if not groups:
            continue
        chart = charts[cid]
        ordered = sorted(groups)
        errs = feature_matrix(chart, ordered)[:, ERROR]
        sel_errors[cid] = errs
        all_errors.extend(errs.tolist())
    if not all_errors:
        raise ValueError("cannot synthesize negatives without any selected groups")
    global_mean = float(np.mean(all_errors))

    out = []
    for cid, chart in charts.items():
        selected = chart_sel.get(cid, set())
        mean_err = (
            float(np.mean(sel_errors[cid])) if cid in sel_errors else global_mean
        )
        candidates = enumerate_candidates(chart)
        feats = feature_matrix(chart, candidates)
        n = len(chart.points)
        for g, row in zip(candidates, feats):
            if g in selected:
                continue
            if not row[ERROR] > mean_err:
                continue
            if row[CVX_OVERLAP] != 0.0:
                continue
            out.append(
                LabeledExample(
                    chart_id=cid,
                    group=g,
                    features=FeatureVector.from_array(row),
                    label=False,
                    source="synthetic_negative",
                    chart_size=n,
                )
            )
    return out


# --- splitting ------------------------------------------------------------

def split_dataset(
    examples: Sequence[LabeledExample], seed: int = 0
) -> tuple[list[LabeledExample], list[LabeledExample], list[LabeledExample]]:
    """Stratified 70/20/10 train/test/holdout split, deterministic per seed.

    Largest-remainder allocation per class keeps the global sizes exact
    whenever the fractions divide the total evenly.
    """
    if len(examples) < 10:
        raise ValueError("need at least 10 examples to split 70/20/10")
    rng = np.random.default_rng(seed)
    splits: tuple[list[LabeledExample], ...] = ([], [], [])
    for label in (True, False):
        idxs = [i for i, ex in enumerate(examples) if ex.label == label]
        if not idxs:
            continue
        rng.shuffle(idxs)
        m = len(idxs)
        quotas = [f * m for f in SPLIT_FRACTIONS]
        counts = [int(q) for q in quotas]
        remainders = [q - c for q, c in zip(quotas, counts)]
        for _ in range(m - sum(counts)):
            j = int(np.argmax(remainders))
            counts[j] += 1
            remainders[j] = -1.0
        start = 0
        for part, c in zip(splits, counts):
            part.extend(examples[i] for i in idxs[start : start + c])
            start += c
    return splits[0], splits[1], splits[2]


def stratified_folds(
    examples: Sequence[LabeledExample], k: int = 5, seed: int = 0
) -> list[list[int]]:
    """k index folds, stratified by label, each example in exactly one fold."""
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pointer = 0
    for label in (True, False):
        idxs = [i for i, ex in enumerate(examples) if ex.label == label]
        rng.shuffle(idxs)
        for i in idxs:
            folds[pointer % k].append(i)
            pointer += 1
    return folds


# --- decision tree training ------------------------------------------------

def _gini_sweep(col: np.ndarray, y: np.ndarray):
    """Best (weighted child impurity, threshold) for one feature column.
    Thresholds are midpoints between consecutive distinct sorted values."""
    order = np.argsort(col, kind="stable")
    vals = col[order]
    pos = y[order].astype(np.float64)
    n = len(vals)
    boundaries = np.nonzero(vals[:-1] != vals[1:])[0]
    if boundaries.size == 0:
        return None
    cum_pos = np.cumsum(pos)
    n_left = boundaries + 1.0
    p_left = cum_pos[boundaries]
    n_right = n - n_left
    p_right = cum_pos[-1] - p_left
    gini_l = 1.0 - (p_left / n_left) ** 2 - ((n_left - p_left) / n_left) ** 2
    gini_r = 1.0 - (p_right / n_right) ** 2 - ((n_right - p_right) / n_right) ** 2
    weighted = (n_left * gini_l + n_right * gini_r) / n
    best = int(np.argmin(weighted))  # first minimum -> lowest threshold
    thr = (vals[boundaries[best]] + vals[boundaries[best] + 1]) / 2.0
    return float(weighted[best]), float(thr)


def train_decision_tree(
    examples: Sequence[LabeledExample],
    max_depth: int = 3,
    feature_policy: Sequence[str] | None = None,
    min_gain: float = 1e-12,
) -> DecisionTree:
    """Greedy Gini CART with probability leaves.

    Split rule matches prediction: value < threshold goes left. Candidate
    features are tried in canonical order and ties go to the earlier
    feature / lower threshold, so training is example-order invariant.
    """
    if not examples:
        raise ValueError("cannot train on an empty example list")
    policy = tuple(feature_policy) if feature_policy is not None else MODEL_FEATURES
    for name in policy:
        if name not in MODEL_FEATURES:
            raise ValueError(f"unknown feature {name!r} in policy")
    feat_names = [name for name in MODEL_FEATURES if name in set(policy)]
    X = features_of(examples)
    cols = {
        name: (
            np.array([float(len(ex.group)) for ex in examples])
            if name == GROUP_SIZE
            else X[:, FEATURE_NAMES.index(name)]
        )
        for name in feat_names
    }
    y = labels_of(examples)

    nodes: list[TreeNode] = []

    def leaf(idx: np.ndarray) -> int:
        n_pos = int(y[idx].sum())
        nodes.append(
            TreeNode(prob=n_pos / idx.size, n_samples=int(idx.size), n_positive=n_pos)
        )
        return len(nodes) - 1

    def grow(idx: np.ndarray, depth: int) -> int:
        sub_y = y[idx]
        n_pos = int(sub_y.sum())
        if depth >= max_depth or n_pos == 0 or n_pos == idx.size:
            return leaf(idx)
        p = n_pos / idx.size
        parent_gini = 1.0 - p * p - (1.0 - p) ** 2
        best = None  # (impurity, feature, threshold)
        for name in feat_names:
            res = _gini_sweep(cols[name][idx], sub_y)
            if res is None:
                continue
            impurity, thr = res
            if best is None or impurity < best[0]:
                best = (impurity, name, thr)
        if best is None or parent_gini - best[0] <= min_gain:
            return leaf(idx)
        impurity, name, thr = best
        go_left = cols[name][idx] < thr
        pos = len(nodes)
        nodes.append(TreeNode())  # placeholder
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        nodes[pos] = TreeNode(
            feature=name,
            threshold=thr,
            left=left,
            right=right,
            n_samples=int(idx.size),
            n_positive=n_pos,
        )
        return pos

    grow(np.arange(len(examples)), 0)
    return DecisionTree(nodes=tuple(nodes), max_depth=max_depth)


def tree_model(
    tree: DecisionTree,
    feature_policy: Sequence[str] | None = None,
    metadata: Mapping[str, object] | None = None,
) -> GroupingModel:
    policy = tuple(feature_policy) if feature_policy is not None else MODEL_FEATURES
    return GroupingModel(
        kind="tree", feature_policy=policy, tree=tree, metadata=dict(metadata or {})
    )


# --- logistic regression with VIF pruning ----------------------------------

VIF_INFINITE = 1e12


def _effectively_constant(col: np.ndarray) -> bool:
    """True for columns whose spread is float noise relative to magnitude
    (e.g. x_sep on a fixed slot layout is one slot width up to ulps)."""
    return float(np.std(col)) <= 1e-12 * max(1.0, abs(float(np.mean(col))))


def compute_vif(X: np.ndarray, names: Sequence[str]) -> dict[str, float]:
    """Variance inflation factor 1/(1-R^2) per column, regressing each
    feature on all the others (with intercept)."""
    X = np.asarray(X, dtype=np.float64)
    k = X.shape[1]
    out = {}
    for j, name in enumerate(names):
        if k == 1:
            out[name] = 1.0
            continue
        target = X[:, j]
        others = np.column_stack(
            [X[:, [i for i in range(k) if i != j]], np.ones(len(X))]
        )
        coef, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ coef
        sst = float(np.sum((target - target.mean()) ** 2))
        ssr = float(np.sum(resid**2))
        if sst == 0.0:
            out[name] = float("inf")
            continue
        r2 = 1.0 - ssr / sst
        out[name] = float("inf") if r2 >= 1.0 - 1.0 / VIF_INFINITE else 1.0 / (1.0 - r2)
    return out


def vif_prune(
    X: np.ndarray, names: Sequence[str], threshold: float = 5.0
) -> tuple[list[str], list[tuple[str, float]]]:
    """Iteratively drop the highest-VIF feature while any exceeds threshold.
    Returns (kept names, [(dropped name, vif at drop time), ...])."""
    names = list(names)
    X = np.asarray(X, dtype=np.float64)
    dropped: list[tuple[str, float]] = []
    while len(names) > 1:
        vifs = compute_vif(X, names)
        worst = max(vifs.values())
        if worst <= threshold:
            break
        # ties (e.g. two identical columns) drop the later feature
        j = max(i for i, n in enumerate(names) if vifs[n] == worst)
        dropped.append((names[j], worst))
        names.pop(j)
        X = np.delete(X, j, axis=1)
    return names, dropped


def train_logistic(
    examples: Sequence[LabeledExample],
    vif_threshold: float = 5.0,
    max_iter: int = 10_000,
    gtol: float = 1e-8,
    coef_cap: float = 50.0,
) -> LogisticModel:
    """Unregularized maximum-likelihood fit on VIF-pruned features.

    Zero-variance columns are dropped up front (their VIF is undefined and
    they carry no signal). Coefficients are bounded at +/-coef_cap as a
    perfect-separation guard; a fit pegged at the bound reports
    converged=False.
    """
    X_all = features_of(examples)
    y = labels_of(examples).astype(np.float64)
    keep = [i for i in range(N_FEATURES) if not _effectively_constant(X_all[:, i])]
    names = [FEATURE_NAMES[i] for i in keep]
    X = X_all[:, keep]
    names, _dropped = vif_prune(X, names, threshold=vif_threshold)
    X = X_all[:, [FEATURE_NAMES.index(n) for n in names]]
    k = X.shape[1]

    def negloglik(params):
        w, b = params[:k], params[k]
        z = X @ w + b
        nll = float(np.sum(np.logaddexp(0.0, z) - y * z))
        err = expit(z) - y
        grad = np.concatenate([X.T @ err, [err.sum()]])
        return nll, grad

    res = minimize(
        negloglik,
        x0=np.zeros(k + 1),
        jac=True,
        method="L-BFGS-B",
        bounds=[(-coef_cap, coef_cap)] * (k + 1),
        options={"maxiter": max_iter, "gtol": gtol},
    )
    params = res.x
    at_cap = bool(np.any(np.abs(params) >= coef_cap - 1e-9))
    return LogisticModel(
        weights={n: float(w) for n, w in zip(names, params[:k])},
        intercept=float(params[k]),
        included_features=tuple(names),
        converged=bool(res.success) and not at_cap,
    )


def logistic_model(
    logistic: LogisticModel, metadata: Mapping[str, object] | None = None
) -> GroupingModel:
    return GroupingModel(
        kind="logistic",
        feature_policy=tuple(logistic.included_features),
        logistic=logistic,
        metadata=dict(metadata or {}),
    )


# --- evaluation -------------------------------------------------------------

def evaluate(
    model: GroupingModel,
    examples: Sequence[LabeledExample],
    threshold: float = 0.5,
) -> EvalReport:
    if not examples:
        raise ValueError("cannot evaluate on an empty example list")
    probs = predict_examples(model, examples)
    pred = probs >= threshold
    truth = labels_of(examples)
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    no_pos = (tp + fp) == 0
    precision = 0.0 if no_pos else tp / (tp + fp)
    recall = 0.0 if (tp + fn) == 0 else tp / (tp + fn)
    f1 = (
        0.0
        if precision <= 0.0 or recall <= 0.0
        else 2.0 * precision * recall / (precision + recall)
    )
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        support=len(examples),
        no_positive_predictions=no_pos,
    )


Trainer = Callable[[Sequence[LabeledExample]], GroupingModel]


def cross_validate(
    trainer: Trainer,
    examples: Sequence[LabeledExample],
    k: int = 5,
    seed: int = 0,
    threshold: float = 0.5,
) -> EvalReport:
    """Stratified k-fold CV; headline metrics are fold means, fold_stats
    carries (mean, sd) per metric."""
    folds = stratified_folds(examples, k=k, seed=seed)
    per_metric: dict[str, list[float]] = {"precision": [], "recall": [], "f1": []}
    for held in folds:
        held_set = set(held)
        train = [ex for i, ex in enumerate(examples) if i not in held_set]
        test = [examples[i] for i in held]
        model = trainer(train)
        rep = evaluate(model, test, threshold=threshold)
        per_metric["precision"].append(rep.precision)
        per_metric["recall"].append(rep.recall)
        per_metric["f1"].append(rep.f1)
    stats = {
        name: (float(np.mean(vals)), float(np.std(vals)))
        for name, vals in per_metric.items()
    }
    return EvalReport(
        precision=stats["precision"][0],
        recall=stats["recall"][0],
        f1=stats["f1"][0],
        support=len(examples),
        fold_stats=stats,
    )


def correlation_matrix(examples: Sequence[LabeledExample]) -> np.ndarray:
    """Pairwise Pearson r over the eight features; entries touching a
    constant feature are NaN (undefined)."""
    if len(examples) < 2:
        raise ValueError("need at least 2 examples")
    X = features_of(examples)
    out = np.full((N_FEATURES, N_FEATURES), np.nan)
    ok = np.array([not _effectively_constant(X[:, i]) for i in range(N_FEATURES)])
    if ok.any():
        sub = np.corrcoef(X[:, ok], rowvar=False)
        sub = np.atleast_2d(sub)
        ii = np.nonzero(ok)[0]
        for a, i in enumerate(ii):
            for b, j in enumerate(ii):
                out[i, j] = sub[a, b]
    return out


def single_feature_study(
    examples: Sequence[LabeledExample],
    feature: str | Sequence[str],
    seed: int = 0,
    max_depth: int = 3,
) -> EvalReport:
    """Train a depth-capped tree on the named feature(s) alone and report
    holdout metrics."""
    policy = (feature,) if isinstance(feature, str) else tuple(feature)
    train, _test, holdout = split_dataset(examples, seed=seed)
    tree = train_decision_tree(train, max_depth=max_depth, feature_policy=policy)
    return evaluate(tree_model(tree, policy), holdout)


# --- cascade ----------------------------------------------------------------

CLUSTER_POLICY = tuple(n for n in FEATURE_NAMES if n in CLUSTER_FEATURES)
COLINEAR_POLICY = tuple(n for n in FEATURE_NAMES if n in COLINEAR_FEATURES)


@dataclass(frozen=True)
class CascadeStudy:
    stage1: EvalReport
    stage2: EvalReport
    model: GroupingModel


def train_cascade(
    examples: Sequence[LabeledExample],
    max_depth: int = 3,
    metadata: Mapping[str, object] | None = None,
) -> GroupingModel:
    """Cluster-feature tree; its hard-decision training errors train the
    co-linearity tree that indecisive inputs fall through to."""
    t1 = train_decision_tree(examples, max_depth=max_depth, feature_policy=CLUSTER_POLICY)
    m1 = tree_model(t1, CLUSTER_POLICY)
    p1 = predict_examples(m1, list(examples))
    wrong = (p1 >= 0.5) != labels_of(examples)
    errors = [ex for ex, w in zip(examples, wrong) if w]
    if errors:
        t2 = train_decision_tree(errors, max_depth=max_depth, feature_policy=COLINEAR_POLICY)
    else:
        base = float(labels_of(examples).mean())
        t2 = DecisionTree(
            nodes=(TreeNode(prob=base, n_samples=len(examples)),), max_depth=max_depth
        )
    return GroupingModel(
        kind="cascade",
        feature_policy=CLUSTER_POLICY + COLINEAR_POLICY,
        stages={
            "cluster": tree_model(t1, CLUSTER_POLICY),
            "colinear": tree_model(t2, COLINEAR_POLICY),
        },
        metadata=dict(metadata or {}),
    )


def cascade_study(
    examples: Sequence[LabeledExample], seed: int = 0, max_depth: int = 3
) -> CascadeStudy:
    """The two-stage analysis: stage 2 is trained on the cluster-only model's
    training errors and evaluated only on its test errors."""
    train, test, _holdout = split_dataset(examples, seed=seed)
    model = train_cascade(train, max_depth=max_depth)
    stage1_model = model.stages["cluster"]
    stage2_model = model.stages["colinear"]
    stage1_report = evaluate(stage1_model, test)
    p1 = predict_examples(stage1_model, test)
    wrong = (p1 >= 0.5) != labels_of(test)
    test_errors = [ex for ex, w in zip(test, wrong) if w]
    if test_errors:
        stage2_report = evaluate(stage2_model, test_errors)
    else:
        stage2_report = EvalReport(precision=0.0, recall=0.0, f1=0.0, support=0,
                                   no_positive_predictions=True)
    return CascadeStudy(stage1=stage1_report, stage2=stage2_report, model=model)


def train_size_routed(
    examples: Sequence[LabeledExample],
    max_depth: int = 3,
    feature_policy: Sequence[str] | None = None,
    metadata: Mapping[str, object] | None = None,
) -> GroupingModel:
    """Separate trees for edge groups (sizes 2 and n-1) and intermediate
    groups, routed by group size at prediction time."""
    policy = tuple(feature_policy) if feature_policy is not None else MODEL_FEATURES
    edge = [ex for ex in examples if len(ex.group) in (2, ex.chart_size - 1)]
    mid = [ex for ex in examples if len(ex.group) not in (2, ex.chart_size - 1)]

    def fit(subset: list[LabeledExample]) -> DecisionTree:
        if subset:
            return train_decision_tree(subset, max_depth=max_depth, feature_policy=policy)
        base = float(labels_of(list(examples)).mean())
        return DecisionTree(nodes=(TreeNode(prob=base),), max_depth=max_depth)

    return GroupingModel(
        kind="size_routed",
        feature_policy=policy,
        stages={
            "edge": tree_model(fit(edge), policy),
            "intermediate": tree_model(fit(mid), policy),
        },
        metadata=dict(metadata or {}),
    )


# --- exact Shapley attribution ----------------------------------------------

def shap_exact(
    model: GroupingModel,
    instance: FeatureVector,
    background: Sequence[FeatureVector],
    group_size: int = 3,
    chart_size: int = 6,
) -> ShapExplanation:
    """Exact Shapley values by enumerating every feature coalition.

    The coalition value replaces coalition features in each background row
    with the instance's values and averages the model output; group size is
    fixed context, not an attributed feature.
    """
    if not background:
        raise ValueError("background set must be non-empty")
    nf = N_FEATURES
    if nf > 12:
        raise ValueError("exact enumeration is limited to 12 features")
    B = np.array([fv.as_array() for fv in background])
    x = instance.as_array()
    b = B.shape[0]
    sizes = np.full(b, group_size)
    v = np.empty(1 << nf)
    for mask in range(1 << nf):
        Bm = B.copy()
        for i in range(nf):
            if mask >> i & 1:
                Bm[:, i] = x[i]
        v[mask] = predict_batch(model, Bm, sizes, chart_size).mean()
    fact = [math.factorial(i) for i in range(nf + 1)]
    weight = [fact[s] * fact[nf - s - 1] / fact[nf] for s in range(nf)]
    phi = np.zeros(nf)
    for mask in range(1 << nf):
        s = bin(mask).count("1")
        for i in range(nf):
            if not mask >> i & 1:
                phi[i] += weight[s] * (v[mask | (1 << i)] - v[mask])
    return ShapExplanation(
        per_feature={name: float(p) for name, p in zip(FEATURE_NAMES, phi)},
        base_value=float(v[0]),
    )
