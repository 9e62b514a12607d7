"""Command-line surface: engine subcommands plus the HTTP server."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .chart import chart_to_dict, generate_random_chart, load_chart, save_chart
from .defaults import DEFAULT_MODEL_ID, DEFAULT_POLICY, default_model
from .diagnose import DEFAULT_EPSILON_LINE, DEFAULT_THRESHOLD, diagnose
from .geometry import Group
from .kernels import FEATURE_NAMES
from .model import load_model, save_model
from .redesign import DEFAULT_ALPHA, DEFAULT_BUDGET, landscape, redesign
from . import training


def _load_model_arg(spec: str):
    if spec == "default":
        return default_model()
    with open(spec) as fh:
        return load_model(json.load(fh))


def _load_groups(path: str) -> list[Group]:
    with open(path) as fh:
        return [Group(members) for members in json.load(fh)]


def _echo_json(doc) -> None:
    click.echo(json.dumps(doc, indent=2))


def dataset_options(fn):
    fn = click.option("--synthetic", type=int, default=None,
                      help="Generate N oracle-labeled examples.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--n-points", type=int, default=6, show_default=True)(fn)
    fn = click.option("--balance", type=float, default=0.5, show_default=True,
                      help="Positive fraction for synthetic data (-1 = natural rate).")(fn)
    fn = click.option("--examples", type=click.Path(exists=True), default=None,
                      help="Load examples from a JSON file.")(fn)
    fn = click.option("--selections", type=click.Path(exists=True), default=None,
                      help="Participant selections CSV (chart_id,participant_id,member_labels).")(fn)
    fn = click.option("--charts-dir", type=click.Path(exists=True), default=None,
                      help="Directory of <chart_id>.json files, required with --selections.")(fn)
    return fn


def _load_dataset(synthetic, seed, n_points, balance, examples, selections, charts_dir):
    if examples is not None:
        return training.load_examples(examples)
    if selections is not None:
        if charts_dir is None:
            raise click.UsageError("--selections requires --charts-dir")
        charts = training.load_chart_dir(charts_dir)
        rows = training.load_selections(selections)
        positives = training.participant_examples(charts, rows)
        by_chart: dict[str, set[Group]] = {}
        for cid, _pid, group in rows:
            by_chart.setdefault(cid, set()).add(group)
        negatives = training.synthesize_negatives(charts, by_chart)
        return positives + negatives
    n = synthetic if synthetic is not None else 5000
    return training.make_synthetic_dataset(
        n, seed=seed, n_points=n_points, balance=None if balance < 0 else balance
    )


@click.group()
def main():
    """Diagnose and redesign data-induced groupings in dot plots."""


@main.command()
@click.option("--chart", "chart_path", type=click.Path(exists=True), required=True)
@click.option("--desired", "desired_path", type=click.Path(exists=True), default=None,
              help="JSON list of label lists.")
@click.option("--model", "model_spec", default="default", show_default=True)
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option("--epsilon-line", type=float, default=DEFAULT_EPSILON_LINE, show_default=True)
def diagnose_cmd(chart_path, desired_path, model_spec, threshold, epsilon_line):
    """Report the groups a viewer is likely to perceive."""
    chart = load_chart(chart_path)
    desired = _load_groups(desired_path) if desired_path else []
    report = diagnose(chart, desired, _load_model_arg(model_spec),
                      threshold=threshold, epsilon_line=epsilon_line)
    _echo_json(report.to_dict())


main.add_command(diagnose_cmd, name="diagnose")


@main.command("redesign")
@click.option("--chart", "chart_path", type=click.Path(exists=True), required=True)
@click.option("--desired", "desired_path", type=click.Path(exists=True), default=None)
@click.option("--model", "model_spec", default="default", show_default=True)
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option("--budget", type=int, default=DEFAULT_BUDGET, show_default=True)
@click.option("--landscape", "with_landscape", is_flag=True,
              help="Include the (violations, desired met) landscape.")
def redesign_cmd(chart_path, desired_path, model_spec, alpha, k, threshold, budget,
                 with_landscape):
    """Search x-axis permutations for a better chart."""
    chart = load_chart(chart_path)
    desired = _load_groups(desired_path) if desired_path else []
    model = _load_model_arg(model_spec)
    result = redesign(chart, desired, model, alpha=alpha, k=k,
                      threshold=threshold, budget=budget)
    payload = {
        "examined": result.examined,
        "results": [p.to_dict() for p in result.results],
    }
    if with_landscape:
        payload["landscape"] = landscape(chart, desired, model,
                                         threshold=threshold, budget=budget).to_dict()
    _echo_json(payload)


@main.command("landscape")
@click.option("--chart", "chart_path", type=click.Path(exists=True), required=True)
@click.option("--desired", "desired_path", type=click.Path(exists=True), default=None)
@click.option("--model", "model_spec", default="default", show_default=True)
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option("--budget", type=int, default=DEFAULT_BUDGET, show_default=True)
def landscape_cmd(chart_path, desired_path, model_spec, threshold, budget):
    """Bucket every valid permutation by (violations, desired met)."""
    chart = load_chart(chart_path)
    desired = _load_groups(desired_path) if desired_path else []
    _echo_json(landscape(chart, desired, _load_model_arg(model_spec),
                         threshold=threshold, budget=budget).to_dict())


@main.command("train")
@dataset_options
@click.option("--kind", type=click.Choice(["tree", "logistic", "cascade", "size-routed"]),
              default="size-routed", show_default=True)
@click.option("--max-depth", type=int, default=3, show_default=True)
@click.option("--vif-threshold", type=float, default=5.0, show_default=True)
@click.option("--include-slope", is_flag=True,
              help="Let trees read slope (breaks mirror invariance).")
@click.option("--model-id", default=None, help="Metadata model id.")
@click.option("--out", type=click.Path(), required=True)
def train_cmd(synthetic, seed, n_points, balance, examples, selections, charts_dir,
              kind, max_depth, vif_threshold, include_slope, model_id, out):
    """Fit a grouping model and write its JSON document."""
    data = _load_dataset(synthetic, seed, n_points, balance, examples, selections, charts_dir)
    train, _test, holdout = training.split_dataset(data, seed=seed)
    policy = None if include_slope else DEFAULT_POLICY
    meta = {
        "model_id": model_id or f"{kind}-{seed}",
        "trained_on": f"{len(train)} examples ({data[0].source} source)",
        "seed": seed,
    }
    if kind == "tree":
        tree = training.train_decision_tree(train, max_depth=max_depth, feature_policy=policy)
        model = training.tree_model(tree, policy, metadata=meta)
    elif kind == "logistic":
        model = training.logistic_model(
            training.train_logistic(train, vif_threshold=vif_threshold), metadata=meta
        )
    elif kind == "cascade":
        model = training.train_cascade(train, max_depth=max_depth, metadata=meta)
    else:
        model = training.train_size_routed(train, max_depth=max_depth,
                                           feature_policy=policy, metadata=meta)
    report = training.evaluate(model, holdout)
    doc = save_model(model)
    doc["metadata"]["holdout_f1"] = round(report.f1, 4)
    Path(out).write_text(json.dumps(doc, indent=2) + "\n")
    click.echo(f"wrote {out} (holdout P={report.precision:.3f} "
               f"R={report.recall:.3f} F1={report.f1:.3f})")


@main.command("evaluate")
@dataset_options
@click.option("--model", "model_spec", default="default", show_default=True)
@click.option("--split", type=click.Choice(["holdout", "test", "train", "all"]),
              default="holdout", show_default=True)
@click.option("--cv", type=int, default=None, help="Run k-fold cross-validation instead.")
def evaluate_cmd(synthetic, seed, n_points, balance, examples, selections, charts_dir,
                 model_spec, split, cv):
    """Precision/recall/F1 of a model on a dataset split."""
    data = _load_dataset(synthetic, seed, n_points, balance, examples, selections, charts_dir)
    model = _load_model_arg(model_spec)
    if cv is not None:
        trainer = lambda ex: training.train_size_routed(ex, feature_policy=DEFAULT_POLICY)
        _echo_json(training.cross_validate(trainer, data, k=cv, seed=seed).to_dict())
        return
    parts = dict(zip(("train", "test", "holdout"), training.split_dataset(data, seed=seed)))
    parts["all"] = data
    _echo_json(training.evaluate(model, parts[split]).to_dict())


@main.command("shap")
@click.option("--model", "model_spec", default="default", show_default=True)
@click.option("--chart", "chart_path", type=click.Path(exists=True), required=True)
@click.option("--group", "group_spec", required=True, help="Comma-separated labels.")
@click.option("--background", type=int, default=200, show_default=True,
              help="Synthetic background examples.")
@click.option("--seed", type=int, default=0, show_default=True)
def shap_cmd(model_spec, chart_path, group_spec, background, seed):
    """Exact Shapley attribution for one group's prediction."""
    from .geometry import feature_vector

    chart = load_chart(chart_path)
    group = Group(group_spec.split(","))
    group.validate(chart)
    instance = feature_vector(chart, group)
    bg = [ex.features for ex in
          training.make_synthetic_dataset(background, seed=seed, balance=None)]
    exp = training.shap_exact(
        _load_model_arg(model_spec), instance, bg,
        group_size=len(group), chart_size=len(chart.points),
    )
    _echo_json(exp.to_dict())


@main.command("synth-negatives")
@click.option("--selections", type=click.Path(exists=True), required=True)
@click.option("--charts-dir", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def synth_negatives_cmd(selections, charts_dir, out):
    """Synthesize clearly-non-group negatives from selection data."""
    charts = training.load_chart_dir(charts_dir)
    rows = training.load_selections(selections)
    by_chart: dict[str, set[Group]] = {}
    for cid, _pid, group in rows:
        by_chart.setdefault(cid, set()).add(group)
    negatives = training.synthesize_negatives(charts, by_chart)
    training.save_examples(negatives, out)
    click.echo(f"wrote {len(negatives)} negatives to {out}")


@main.command("corr")
@dataset_options
def corr_cmd(synthetic, seed, n_points, balance, examples, selections, charts_dir):
    """Pairwise Pearson correlation matrix of the eight features."""
    data = _load_dataset(synthetic, seed, n_points, balance, examples, selections, charts_dir)
    matrix = training.correlation_matrix(data)
    width = max(len(n) for n in FEATURE_NAMES)
    click.echo(" " * (width + 1) + "  ".join(f"{n[:7]:>7}" for n in FEATURE_NAMES))
    for name, row in zip(FEATURE_NAMES, matrix):
        cells = "  ".join("   nan " if np.isnan(v) else f"{v:+.2f}  " for v in row)
        click.echo(f"{name:>{width}} {cells}")


@main.command("random-chart")
@click.option("--n", type=int, default=6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Write JSON here (default stdout).")
def random_chart_cmd(n, seed, out):
    """Generate a random stimulus chart."""
    chart = generate_random_chart(n=n, seed=seed)
    if out:
        save_chart(chart, out)
        click.echo(f"wrote {out}")
    else:
        _echo_json(chart_to_dict(chart))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--data-dir", type=click.Path(), default=None,
              help="Overrides GROUPSENSE_DATA_DIR.")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Static designer UI directory (default ./frontend).")
def serve_cmd(host, port, data_dir, ui_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir=data_dir, ui_dir=ui_dir), host=host, port=port)


if __name__ == "__main__":
    main()
