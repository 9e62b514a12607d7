"""The shipped default grouping model.

Trained on synthetic oracle labels, NOT on the original study selections
(those are unpublished). The model is a size-routed pair of depth-3 trees
whose feature policy excludes slope, which makes every diagnosis invariant
under mirroring the x-axis. Regenerate with scripts/train_default_model.py.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .model import MODEL_FEATURES, GroupingModel, load_model, save_model

DEFAULT_MODEL_ID = "default-v1"

# Everything except slope (unused by viewers per the importance analysis;
# excluding it buys mirror symmetry).
DEFAULT_POLICY = tuple(n for n in MODEL_FEATURES if n != "slope")


@lru_cache(maxsize=1)
def default_model() -> GroupingModel:
    doc = json.loads(
        resources.files("groupsense.data").joinpath("default_v1.json").read_text()
    )
    return load_model(doc)


def build_default_model(
    seed: int = 7, n_examples: int = 9000, max_depth: int = 3
) -> GroupingModel:
    """Train the default model from scratch (slow path; ships pre-built)."""
    from .training import (
        evaluate,
        make_synthetic_dataset,
        split_dataset,
        train_size_routed,
    )

    examples = make_synthetic_dataset(n_examples, seed=seed, balance=0.5)
    train, _test, holdout = split_dataset(examples, seed=seed)
    model = train_size_routed(train, max_depth=max_depth, feature_policy=DEFAULT_POLICY)
    report = evaluate(model, holdout)
    meta = {
        "model_id": DEFAULT_MODEL_ID,
        "trained_on": "synthetic oracle labels (not the original study selections)",
        "seed": seed,
        "n_examples": n_examples,
        "holdout_precision": round(report.precision, 4),
        "holdout_recall": round(report.recall, 4),
        "holdout_f1": round(report.f1, 4),
    }
    doc = save_model(model)
    doc["metadata"] = meta
    return load_model(doc)
