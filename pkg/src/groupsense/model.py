"""Serializable predictors mapping group features to a perception probability.

Four model kinds compose the predictor zoo:

  tree         depth-capped decision tree with probability leaves
  logistic     sigmoid of an affine score over a feature subset
  cascade      cluster-feature stage; indecisive cases (probability inside
               the open (0.1, 0.9) band) fall through to a co-linearity stage
  size_routed  delegates to an "edge" model for group sizes {2, n-1} and an
               "intermediate" model for sizes 3..n-2

Trees may split on the pseudo-feature "group_size" in addition to the eight
geometry features; the group size is always available at prediction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from .geometry import FeatureVector
from .kernels import FEATURE_NAMES

GROUP_SIZE = "group_size"
MODEL_FEATURES = FEATURE_NAMES + (GROUP_SIZE,)
_COL = {name: i for i, name in enumerate(MODEL_FEATURES)}

CLUSTER_FEATURES = frozenset(
    {"x_sep", "y_sep", "cvx_overlap", "centroid_distance", "centroid_diameter", "centroid_ratio"}
)
COLINEAR_FEATURES = frozenset({"slope", "error"})

# Cascade stage-1 probabilities at or beyond these bounds are final.
DECISIVE_LO = 0.1
DECISIVE_HI = 0.9

MODEL_DOC_VERSION = 1


class ModelError(ValueError):
    """Model construction, document, or prediction error with a stable code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def _check_features(names, where: str) -> None:
    for name in names:
        if name not in _COL:
            raise ModelError("unknown-feature", f"{name!r} in {where}")


@dataclass(frozen=True)
class TreeNode:
    """Split node when feature is set; probability leaf otherwise."""

    feature: str | None = None
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    prob: float = 0.0
    # Training provenance, used by prune(); not required for prediction.
    n_samples: int = 0
    n_positive: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class DecisionTree:
    nodes: tuple[TreeNode, ...]
    max_depth: int = 3

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ModelError("bad-tree", "tree has no nodes")
        seen = set()
        max_seen_depth = 0
        stack = [(0, 0)]
        while stack:
            idx, depth = stack.pop()
            if idx < 0 or idx >= len(self.nodes):
                raise ModelError("bad-tree", f"child index {idx} out of range")
            if idx in seen:
                raise ModelError("bad-tree", f"node {idx} reachable twice (cycle or shared child)")
            seen.add(idx)
            max_seen_depth = max(max_seen_depth, depth)
            node = self.nodes[idx]
            if node.is_leaf:
                if not 0.0 <= node.prob <= 1.0:
                    raise ModelError("bad-tree", f"leaf prob {node.prob} outside [0, 1]")
            else:
                _check_features([node.feature], "tree split")
                stack.append((node.left, depth + 1))
                stack.append((node.right, depth + 1))
        if len(seen) != len(self.nodes):
            raise ModelError("bad-tree", "unreachable nodes present")
        if max_seen_depth > self.max_depth:
            raise ModelError(
                "depth-exceeded",
                f"tree depth {max_seen_depth} exceeds max_depth {self.max_depth}",
            )

    @cached_property
    def _arrays(self):
        feat = np.array(
            [-1 if n.is_leaf else _COL[n.feature] for n in self.nodes], dtype=np.int64
        )
        thresh = np.array([n.threshold for n in self.nodes])
        left = np.array([n.left for n in self.nodes], dtype=np.int64)
        right = np.array([n.right for n in self.nodes], dtype=np.int64)
        prob = np.array([n.prob for n in self.nodes])
        return feat, thresh, left, right, prob

    def features_used(self) -> frozenset[str]:
        return frozenset(n.feature for n in self.nodes if not n.is_leaf)

    def depth(self) -> int:
        def walk(idx: int) -> int:
            node = self.nodes[idx]
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)

    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    def predict_batch(self, cols: np.ndarray) -> np.ndarray:
        """cols is an (m, 9) matrix in MODEL_FEATURES column order.
        Descent rule: value < threshold goes left, ties go right."""
        feat, thresh, left, right, prob = self._arrays
        m = cols.shape[0]
        idx = np.zeros(m, dtype=np.int64)
        rows = np.arange(m)
        for _ in range(self.max_depth):
            fi = feat[idx]
            active = fi >= 0
            if not active.any():
                break
            vals = cols[rows, np.where(active, fi, 0)]
            go_left = active & (vals < thresh[idx])
            idx = np.where(go_left, left[idx], np.where(active, right[idx], idx))
        return prob[idx]


@dataclass(frozen=True)
class LogisticModel:
    weights: Mapping[str, float]
    intercept: float
    included_features: tuple[str, ...]
    converged: bool = True

    def __post_init__(self) -> None:
        _check_features(self.included_features, "logistic model")
        if set(self.weights) != set(self.included_features):
            raise ModelError(
                "bad-document", "weights must be defined exactly for included_features"
            )

    @cached_property
    def _vector(self):
        w = np.zeros(len(MODEL_FEATURES))
        for name, val in self.weights.items():
            w[_COL[name]] = val
        return w

    def features_used(self) -> frozenset[str]:
        return frozenset(self.included_features)

    def predict_batch(self, cols: np.ndarray) -> np.ndarray:
        return expit(cols @ self._vector + self.intercept)


@dataclass(frozen=True)
class GroupingModel:
    """Root predictor: one of the four kinds plus policy and provenance."""

    kind: str
    feature_policy: tuple[str, ...]
    tree: DecisionTree | None = None
    logistic: LogisticModel | None = None
    stages: Mapping[str, "GroupingModel"] | None = None
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_features(self.feature_policy, "feature_policy")
        policy = set(self.feature_policy)
        if self.kind == "tree":
            if self.tree is None:
                raise ModelError("bad-document", "tree model without tree payload")
            used = self.tree.features_used()
        elif self.kind == "logistic":
            if self.logistic is None:
                raise ModelError("bad-document", "logistic model without payload")
            used = self.logistic.features_used()
        elif self.kind == "cascade":
            self._check_stages(("cluster", "colinear"))
            cluster, colinear = self.stages["cluster"], self.stages["colinear"]
            if not set(cluster.feature_policy) <= CLUSTER_FEATURES:
                raise ModelError(
                    "policy-violation", "cascade cluster stage may read cluster features only"
                )
            if not set(colinear.feature_policy) <= COLINEAR_FEATURES:
                raise ModelError(
                    "policy-violation", "cascade colinear stage may read slope/error only"
                )
            used = set(cluster.feature_policy) | set(colinear.feature_policy)
        elif self.kind == "size_routed":
            self._check_stages(("edge", "intermediate"))
            used = set()
            for sub in self.stages.values():
                used |= set(sub.feature_policy)
        else:
            raise ModelError("bad-kind", f"unknown model kind {self.kind!r}")
        if not used <= policy:
            raise ModelError(
                "policy-violation",
                f"model reads {sorted(used - policy)} outside feature_policy",
            )

    def _check_stages(self, names: tuple[str, ...]) -> None:
        if self.stages is None or set(self.stages) != set(names):
            raise ModelError("bad-document", f"{self.kind} model needs stages {names}")

    @property
    def model_id(self) -> str:
        return str(self.metadata.get("model_id", "unnamed"))

    def uses_feature(self, name: str) -> bool:
        if self.kind == "tree":
            return name in self.tree.features_used()
        if self.kind == "logistic":
            return name in self.logistic.features_used()
        return any(sub.uses_feature(name) for sub in self.stages.values())

    def _predict_cols(self, cols: np.ndarray, chart_size: int) -> np.ndarray:
        if self.kind == "tree":
            return self.tree.predict_batch(cols)
        if self.kind == "logistic":
            return self.logistic.predict_batch(cols)
        if self.kind == "cascade":
            probs = self.stages["cluster"]._predict_cols(cols, chart_size)
            indecisive = (probs > DECISIVE_LO) & (probs < DECISIVE_HI)
            if indecisive.any():
                probs = probs.copy()
                probs[indecisive] = self.stages["colinear"]._predict_cols(
                    cols[indecisive], chart_size
                )
            return probs
        sizes = cols[:, _COL[GROUP_SIZE]]
        edge = (sizes == 2) | (sizes == chart_size - 1)
        probs = np.empty(cols.shape[0])
        if edge.any():
            probs[edge] = self.stages["edge"]._predict_cols(cols[edge], chart_size)
        if (~edge).any():
            probs[~edge] = self.stages["intermediate"]._predict_cols(cols[~edge], chart_size)
        return probs


def _feature_cols(features: np.ndarray, group_sizes: np.ndarray) -> np.ndarray:
    return np.column_stack([features, group_sizes.astype(np.float64)])


def predict_batch(
    model: GroupingModel,
    features: np.ndarray,
    group_sizes: Sequence[int] | np.ndarray,
    chart_size: int,
) -> np.ndarray:
    """Probabilities for an (m, 8) feature matrix with per-row group sizes."""
    features = np.asarray(features, dtype=np.float64)
    sizes = np.asarray(group_sizes)
    if features.ndim != 2 or features.shape[1] != len(FEATURE_NAMES):
        raise ModelError("bad-input", f"expected (m, {len(FEATURE_NAMES)}) feature matrix")
    if sizes.shape != (features.shape[0],):
        raise ModelError("bad-input", "one group size per feature row required")
    if sizes.size and (sizes.min() < 2 or sizes.max() > chart_size - 1):
        raise ModelError(
            "size-out-of-range",
            f"group sizes must lie in [2, {chart_size - 1}] for chart size {chart_size}",
        )
    return model._predict_cols(_feature_cols(features, sizes), chart_size)


def predict(
    model: GroupingModel,
    features: FeatureVector,
    group_size: int,
    chart_size: int,
) -> float:
    """Probability that the group reads as a perceptual unit."""
    probs = predict_batch(
        model, features.as_array()[None, :], np.array([group_size]), chart_size
    )
    return float(probs[0])


# --- document (de)serialization ------------------------------------------

def _tree_to_doc(tree: DecisionTree) -> dict:
    nodes = []
    for n in tree.nodes:
        if n.is_leaf:
            doc = {"kind": "leaf", "prob": n.prob}
        else:
            doc = {
                "kind": "split",
                "feature": n.feature,
                "threshold": n.threshold,
                "left": n.left,
                "right": n.right,
            }
        if n.n_samples:
            doc["n_samples"] = n.n_samples
            doc["n_positive"] = n.n_positive
        nodes.append(doc)
    return {"max_depth": tree.max_depth, "nodes": nodes}


def _tree_from_doc(doc) -> DecisionTree:
    try:
        nodes = []
        for nd in doc["nodes"]:
            if nd["kind"] == "leaf":
                nodes.append(
                    TreeNode(
                        prob=float(nd["prob"]),
                        n_samples=int(nd.get("n_samples", 0)),
                        n_positive=int(nd.get("n_positive", 0)),
                    )
                )
            elif nd["kind"] == "split":
                nodes.append(
                    TreeNode(
                        feature=str(nd["feature"]),
                        threshold=float(nd["threshold"]),
                        left=int(nd["left"]),
                        right=int(nd["right"]),
                        n_samples=int(nd.get("n_samples", 0)),
                        n_positive=int(nd.get("n_positive", 0)),
                    )
                )
            else:
                raise ModelError("bad-document", f"unknown node kind {nd['kind']!r}")
        return DecisionTree(nodes=tuple(nodes), max_depth=int(doc["max_depth"]))
    except (KeyError, TypeError) as exc:
        raise ModelError("bad-document", f"malformed tree: {exc}") from exc


def _model_to_subdoc(model: GroupingModel) -> dict:
    doc: dict = {"kind": model.kind, "feature_policy": list(model.feature_policy)}
    if model.kind == "tree":
        doc["tree"] = _tree_to_doc(model.tree)
    elif model.kind == "logistic":
        doc["logistic"] = {
            "weights": dict(model.logistic.weights),
            "intercept": model.logistic.intercept,
            "included_features": list(model.logistic.included_features),
            "converged": model.logistic.converged,
        }
    else:
        doc["stages"] = {name: _model_to_subdoc(sub) for name, sub in model.stages.items()}
    return doc


def _model_from_subdoc(doc, metadata=None) -> GroupingModel:
    try:
        kind = doc["kind"]
        policy = tuple(doc["feature_policy"])
    except (KeyError, TypeError) as exc:
        raise ModelError("bad-document", f"missing kind/feature_policy: {exc}") from exc
    kwargs: dict = {"kind": kind, "feature_policy": policy}
    if metadata is not None:
        kwargs["metadata"] = metadata
    if kind == "tree":
        kwargs["tree"] = _tree_from_doc(doc.get("tree"))
    elif kind == "logistic":
        sub = doc.get("logistic")
        try:
            kwargs["logistic"] = LogisticModel(
                weights={k: float(v) for k, v in sub["weights"].items()},
                intercept=float(sub["intercept"]),
                included_features=tuple(sub["included_features"]),
                converged=bool(sub.get("converged", True)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ModelError("bad-document", f"malformed logistic payload: {exc}") from exc
    elif kind in ("cascade", "size_routed"):
        stages = doc.get("stages")
        if not isinstance(stages, Mapping):
            raise ModelError("bad-document", f"{kind} model needs a stages mapping")
        kwargs["stages"] = {
            name: _model_from_subdoc(sub) for name, sub in stages.items()
        }
    else:
        raise ModelError("bad-kind", f"unknown model kind {kind!r}")
    return GroupingModel(**kwargs)


def save_model(model: GroupingModel) -> dict:
    doc = _model_to_subdoc(model)
    doc["version"] = MODEL_DOC_VERSION
    doc["metadata"] = dict(model.metadata)
    return doc


def load_model(doc: Mapping) -> GroupingModel:
    if not isinstance(doc, Mapping):
        raise ModelError("bad-document", "model document must be a mapping")
    version = doc.get("version")
    if version != MODEL_DOC_VERSION:
        raise ModelError("unknown-version", f"unsupported model document version {version!r}")
    return _model_from_subdoc(doc, metadata=dict(doc.get("metadata", {})))


def prune_tree(tree: DecisionTree, depth: int) -> DecisionTree:
    """Truncate below the given depth; cut subtrees become leaves carrying
    their node's training positive fraction (requires stored sample counts)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")

    nodes: list[TreeNode] = []

    def copy(idx: int, d: int) -> int:
        node = tree.nodes[idx]
        pos = len(nodes)
        if node.is_leaf:
            nodes.append(node)
            return pos
        if d == depth:
            if node.n_samples <= 0:
                raise ValueError("cannot prune: tree carries no sample counts")
            nodes.append(
                TreeNode(
                    prob=node.n_positive / node.n_samples,
                    n_samples=node.n_samples,
                    n_positive=node.n_positive,
                )
            )
            return pos
        nodes.append(node)  # placeholder, patched below
        left = copy(node.left, d + 1)
        right = copy(node.right, d + 1)
        nodes[pos] = TreeNode(
            feature=node.feature,
            threshold=node.threshold,
            left=left,
            right=right,
            n_samples=node.n_samples,
            n_positive=node.n_positive,
        )
        return pos

    copy(0, 0)
    return DecisionTree(nodes=tuple(nodes), max_depth=min(tree.max_depth, depth))
