"""Experiment harness: train per fold, apply each method, evaluate, aggregate.

Per fold the forest is trained on the train split only; the threshold
policy is fitted on train-split vote-fraction scores; fairness-adjusted
traversal uses counter-based streams keyed by (master seed, fold) with the
dataset row index as the stream id, so method comparisons share training
randomness but not flip randomness.

All report artifacts are deterministic given (config, seed); wall-clock
timings are kept out of them and written to a separate timing file.
"""

from __future__ import annotations

import json
import math
import platform
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import __version__
from .data import FoldPlan, load_dataset, load_dataset_config, make_folds
from .errors import ConfigError, DataError
from .metrics import MetricsReport, full_report
from .rng import stream_key
from .threshold import ThresholdPolicy, apply_threshold_policy, fit_threshold_policy
from .traversal import (
    VOTE_MAJORITY,
    FairnessSpec,
    TraversalConfig,
    exact_path_distribution,
    predict_fair_batch,
)
from .tree import Dataset, Forest, forest_votes_batch, predict_forest_batch, train_forest

REPORT_SCHEMA = "fairtree-report/1"
SWEEP_SCHEMA = "fairtree-sweep/1"

METHOD_BASELINE = "baseline"
METHOD_THRESHOLD = "threshold_optimizer"
METHOD_FAIRTTTS = "fairttts"
METHODS = (METHOD_BASELINE, METHOD_THRESHOLD, METHOD_FAIRTTTS)

METRICS = ("accuracy", "eod", "di", "di_distance")

# domain-separation tags for derived seeds
_TAG_FOLDS = 101
_TAG_TRAIN = 102
_TAG_ENGINE = 103


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_config: Optional[str] = None
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    features_per_split: "int | str | None" = "sqrt"
    bootstrap: bool = True
    n_simulations: int = 100
    p_max: float = 0.1
    alpha: float = 9.0
    folds: int = 5
    methods: tuple = METHODS
    seed: int = 0
    exact: bool = False
    aggregation: str = VOTE_MAJORITY
    stratified: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if not self.methods:
            raise ConfigError("at least one method must be selected")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods: {unknown}; choose from {METHODS}")
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.exact and self.n_trees != 1:
            raise ConfigError("exact evaluation requires n_trees == 1")
        if isinstance(self.features_per_split, str) and self.features_per_split != "sqrt":
            raise ConfigError("features_per_split must be an integer, 'sqrt', or null")

    def traversal_config(self, seed: int) -> TraversalConfig:
        return TraversalConfig(
            n_simulations=self.n_simulations,
            p_max=self.p_max,
            alpha=self.alpha,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "dataset_config": self.dataset_config,
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "features_per_split": self.features_per_split,
            "bootstrap": self.bootstrap,
            "n_simulations": self.n_simulations,
            "p_max": self.p_max,
            "alpha": self.alpha,
            "folds": self.folds,
            "methods": list(self.methods),
            "seed": self.seed,
            "exact": self.exact,
            "aggregation": self.aggregation,
            "stratified": self.stratified,
        }


@dataclass(frozen=True)
class ExperimentResult:
    dataset: str
    seed: int
    folds: int
    methods: tuple
    config: dict
    fold_reports: dict
    aggregates: dict
    environment: dict
    timings: dict = field(compare=False, default_factory=dict)


@dataclass(frozen=True)
class SweepResult:
    alphas: tuple
    results: tuple  # one ExperimentResult per alpha, same order


def _environment(seed: int) -> dict:
    return {
        "fairtree": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": seed,
    }


def _resolve_features_per_split(value, n_features: int):
    if value == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    return value


def _aggregate(reports) -> dict:
    out = {}
    for metric in METRICS:
        values = [getattr(r, metric) for r in reports]
        defined = [v for v in values if v is not None]
        if defined:
            mean = float(np.mean(defined))
            std = float(np.std(defined, ddof=1)) if len(defined) > 1 else 0.0
        else:
            mean = None
            std = None
        out[metric] = {
            "mean": mean,
            "std": std,
            "folds_used": len(defined),
            "folds_excluded": len(values) - len(defined),
        }
    return out


def fit_fold(
    dataset: Dataset,
    plan: FoldPlan,
    fold: int,
    config: ExperimentConfig,
    protected_index: int,
):
    """Train the fold's forest (and threshold policy if requested) using
    only the fold's train split."""
    tr = plan.train_indices(fold)
    train_data = Dataset(
        feature_names=dataset.feature_names,
        feature_kinds=dataset.feature_kinds,
        rows=dataset.rows[tr],
        labels=dataset.labels[tr],
    )
    forest = train_forest(
        train_data,
        n_trees=config.n_trees,
        max_depth=config.max_depth,
        min_samples_leaf=config.min_samples_leaf,
        features_per_split=_resolve_features_per_split(
            config.features_per_split, dataset.n_features
        ),
        rng_seed=stream_key(config.seed, _TAG_TRAIN, fold),
        bootstrap=config.bootstrap,
    )
    policy = None
    if METHOD_THRESHOLD in config.methods:
        scores_tr = forest_votes_batch(forest, train_data.rows) / forest.n_trees
        group_tr = train_data.rows[:, protected_index].astype(np.int64)
        policy = fit_threshold_policy(scores_tr, train_data.labels, group_tr)
    return forest, policy


def _exact_predictions(forest: Forest, X, spec, engine_cfg) -> np.ndarray:
    tree = forest.trees[0]
    preds = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        dist = exact_path_distribution(tree, X[i], spec, engine_cfg)
        preds[i] = dist.predicted_class
    return preds


def _plan_folds(dataset: Dataset, config: ExperimentConfig) -> FoldPlan:
    return make_folds(
        dataset.n_rows,
        config.folds,
        stream_key(config.seed, _TAG_FOLDS),
        labels=dataset.labels if config.stratified else None,
    )


def _evaluate_folds(
    dataset: Dataset,
    protected_index: int,
    dataset_name: str,
    config: ExperimentConfig,
    plan: FoldPlan,
    fitted,
) -> ExperimentResult:
    """Score every (method, fold) pair against fold test splits using the
    already-fitted per-fold models."""
    spec = FairnessSpec(protected_feature=protected_index)
    group_all = dataset.rows[:, protected_index].astype(np.int64)
    fold_reports = {m: [] for m in config.methods}
    timings = {m: [] for m in config.methods}
    for fold, (forest, policy) in enumerate(fitted):
        try:
            te = plan.test_indices(fold)
            X_te = dataset.rows[te]
            y_te = dataset.labels[te]
            g_te = group_all[te]
            for method in config.methods:
                start = time.perf_counter()
                if method == METHOD_BASELINE:
                    preds = predict_forest_batch(forest, X_te)
                elif method == METHOD_THRESHOLD:
                    scores_te = forest_votes_batch(forest, X_te) / forest.n_trees
                    preds = apply_threshold_policy(policy, scores_te, g_te)
                else:
                    engine_cfg = config.traversal_config(
                        stream_key(config.seed, _TAG_ENGINE, fold)
                    )
                    if config.exact:
                        preds = _exact_predictions(forest, X_te, spec, engine_cfg)
                    else:
                        preds, _ = predict_fair_batch(
                            forest, X_te, spec, engine_cfg,
                            stream_ids=te, aggregation=config.aggregation,
                        )
                elapsed = time.perf_counter() - start
                fold_reports[method].append(full_report(y_te, preds, g_te))
                timings[method].append(elapsed)
        except (ValueError, DataError) as exc:
            raise DataError(f"fold {fold}: {exc}") from exc
    return ExperimentResult(
        dataset=dataset_name,
        seed=config.seed,
        folds=config.folds,
        methods=tuple(config.methods),
        config=config.to_dict(),
        fold_reports=fold_reports,
        aggregates={m: _aggregate(fold_reports[m]) for m in config.methods},
        environment=_environment(config.seed),
        timings=timings,
    )


def run_experiment_on(
    dataset: Dataset,
    protected_index: int,
    dataset_name: str,
    config: ExperimentConfig,
) -> ExperimentResult:
    """Run the configured experiment on an already-loaded dataset."""
    plan = _plan_folds(dataset, config)
    fitted = []
    for fold in range(config.folds):
        try:
            fitted.append(fit_fold(dataset, plan, fold, config, protected_index))
        except (ValueError, DataError) as exc:
            raise DataError(f"fold {fold}: {exc}") from exc
    return _evaluate_folds(dataset, protected_index, dataset_name, config, plan, fitted)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Load the configured dataset and run the full experiment."""
    if config.dataset_config is None:
        raise ConfigError("dataset_config path is required")
    ds_config = load_dataset_config(config.dataset_config)
    dataset = load_dataset(ds_config)
    return run_experiment_on(
        dataset,
        dataset.feature_index(ds_config.protected_column),
        ds_config.name,
        config,
    )


def sweep_alpha(config: ExperimentConfig, alphas) -> SweepResult:
    """The experiment per alpha, training each fold only once (the fitted
    forests and policies do not depend on alpha and are shared)."""
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ConfigError("alphas must be non-empty")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ConfigError("alphas must be strictly increasing (no duplicates)")
    if config.dataset_config is None:
        raise ConfigError("dataset_config path is required")
    ds_config = load_dataset_config(config.dataset_config)
    dataset = load_dataset(ds_config)
    protected_index = dataset.feature_index(ds_config.protected_column)
    plan = _plan_folds(dataset, config)
    fitted = []
    for fold in range(config.folds):
        try:
            fitted.append(fit_fold(dataset, plan, fold, config, protected_index))
        except (ValueError, DataError) as exc:
            raise DataError(f"fold {fold}: {exc}") from exc
    results = [
        _evaluate_folds(
            dataset, protected_index, ds_config.name,
            replace(config, alpha=alpha), plan, fitted,
        )
        for alpha in alphas
    ]
    return SweepResult(alphas=tuple(alphas), results=tuple(results))


# ---------------------------------------------------------------------------
# report emission

def result_to_dict(result: ExperimentResult) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "dataset": result.dataset,
        "seed": result.seed,
        "folds": result.folds,
        "methods": list(result.methods),
        "config": result.config,
        "fold_reports": {
            m: [r.to_dict() for r in reports]
            for m, reports in result.fold_reports.items()
        },
        "aggregates": result.aggregates,
        "environment": result.environment,
    }


def result_from_dict(doc: dict) -> ExperimentResult:
    if doc.get("schema") != REPORT_SCHEMA:
        raise ConfigError(f"expected schema {REPORT_SCHEMA!r}")
    return ExperimentResult(
        dataset=doc["dataset"],
        seed=doc["seed"],
        folds=doc["folds"],
        methods=tuple(doc["methods"]),
        config=doc["config"],
        fold_reports={
            m: [MetricsReport.from_dict(r) for r in reports]
            for m, reports in doc["fold_reports"].items()
        },
        aggregates=doc["aggregates"],
        environment=doc["environment"],
    )


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fmt(value, digits=4) -> str:
    return "undefined" if value is None else f"{value:.{digits}f}"


def render_table(result: ExperimentResult) -> str:
    """Fixed-width aggregate table (no timings, no environment noise)."""
    lines = [
        f"dataset: {result.dataset}   folds: {result.folds}   seed: {result.seed}",
        "",
        f"{'method':<20} {'metric':<12} {'mean':>10} {'std':>10} {'folds':>6} {'excl':>5}",
        "-" * 67,
    ]
    for method in result.methods:
        for metric in METRICS:
            cell = result.aggregates[method][metric]
            lines.append(
                f"{method:<20} {metric:<12} {_fmt(cell['mean']):>10} "
                f"{_fmt(cell['std']):>10} {cell['folds_used']:>6} {cell['folds_excluded']:>5}"
            )
    return "\n".join(lines) + "\n"


def render_csv(result: ExperimentResult) -> str:
    lines = ["method,metric,mean,std,folds_used,folds_excluded"]
    for method in result.methods:
        for metric in METRICS:
            cell = result.aggregates[method][metric]
            mean = "" if cell["mean"] is None else repr(cell["mean"])
            std = "" if cell["std"] is None else repr(cell["std"])
            lines.append(
                f"{method},{metric},{mean},{std},"
                f"{cell['folds_used']},{cell['folds_excluded']}"
            )
    return "\n".join(lines) + "\n"


def emit_report(result: ExperimentResult, out_dir, formats=("json", "csv", "table")):
    """Write report artifacts; returns {format: path}. Timings go to a
    separate timing.json so report bytes are reproducible run to run."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    try:
        if "json" in formats:
            paths["json"] = os.path.join(out_dir, "report.json")
            _write(paths["json"], _dump_json(result_to_dict(result)))
        if "csv" in formats:
            paths["csv"] = os.path.join(out_dir, "report.csv")
            _write(paths["csv"], render_csv(result))
        if "table" in formats:
            paths["table"] = os.path.join(out_dir, "report.txt")
            _write(paths["table"], render_table(result))
        if result.timings:
            paths["timing"] = os.path.join(out_dir, "timing.json")
            _write(
                paths["timing"],
                _dump_json({"schema": "fairtree-timing/1", "seconds": result.timings}),
            )
    except OSError as exc:
        raise DataError(f"cannot write report to {out_dir}: {exc}") from exc
    return paths


def parse_report(path) -> ExperimentResult:
    with open(path, "r", encoding="utf-8") as fh:
        return result_from_dict(json.load(fh))


def sweep_to_dict(sweep: SweepResult) -> dict:
    rows = []
    for alpha, result in zip(sweep.alphas, sweep.results):
        agg = result.aggregates[METHOD_FAIRTTTS]
        rows.append({"alpha": alpha, **{m: agg[m] for m in METRICS}})
    doc = {
        "schema": SWEEP_SCHEMA,
        "alphas": list(sweep.alphas),
        "fairttts": rows,
        "reference": {
            m: sweep.results[0].aggregates[m]
            for m in sweep.results[0].methods
            if m != METHOD_FAIRTTTS
        },
        "dataset": sweep.results[0].dataset,
        "environment": sweep.results[0].environment,
    }
    return doc


def emit_sweep(sweep: SweepResult, out_dir, formats=("json", "csv")):
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    doc = sweep_to_dict(sweep)
    try:
        if "json" in formats:
            paths["json"] = os.path.join(out_dir, "sweep.json")
            _write(paths["json"], _dump_json(doc))
        if "csv" in formats:
            lines = ["alpha,accuracy_mean,accuracy_std,eod_mean,eod_std,di_mean,di_std"]
            for row in doc["fairttts"]:
                lines.append(
                    ",".join(
                        [repr(row["alpha"])]
                        + [
                            "" if row[m][k] is None else repr(row[m][k])
                            for m in ("accuracy", "eod", "di")
                            for k in ("mean", "std")
                        ]
                    )
                )
            paths["csv"] = os.path.join(out_dir, "sweep.csv")
            _write(paths["csv"], "\n".join(lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write sweep to {out_dir}: {exc}") from exc
    return paths


def _write(path, text) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
