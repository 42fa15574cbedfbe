#!/usr/bin/env python3
"""Scale and mechanism probe on census-shaped synthetic data.

The public benchmark CSVs cannot be fetched in every environment, so this
probe generates a dataset with the same shape as the census benchmark
(32,561 rows, 14 mixed-type features, ~24% positive rate, outcome
suppressed for the unprivileged group) and runs the full 25-tree, 5-fold
pipeline on it. It reports wall time per stage plus the direction checks
the real benchmark asserts. Not a test; a dry run for budgeting.
"""

import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fairtree.bench import (  # noqa: E402
    METHOD_BASELINE,
    METHOD_FAIRTTTS,
    METHOD_THRESHOLD,
    ExperimentConfig,
    run_experiment_on,
)
from fairtree.tree import Dataset  # noqa: E402


def census_shaped(seed=1, n=32_561):
    rng = np.random.default_rng(seed)
    age = rng.integers(17, 91, n).astype(float)
    workclass = rng.integers(0, 9, n).astype(float)
    fnlwgt = rng.integers(12_000, 1_500_000, n).astype(float)
    education = rng.integers(0, 16, n).astype(float)
    education_num = np.clip(education + rng.integers(-1, 2, n), 1, 16).astype(float)
    marital = rng.integers(0, 7, n).astype(float)
    occupation = rng.integers(0, 14, n).astype(float)
    relationship = rng.integers(0, 6, n).astype(float)
    race = (rng.random(n) < 0.85).astype(float)
    sex = (rng.random(n) < 0.66).astype(float)
    capital_gain = np.where(rng.random(n) < 0.08, rng.integers(1, 99_999, n), 0).astype(float)
    capital_loss = np.where(rng.random(n) < 0.05, rng.integers(1, 4_356, n), 0).astype(float)
    hours = rng.integers(1, 99, n).astype(float)
    country = rng.integers(0, 41, n).astype(float)

    merit = (
        0.08 * (age - 17) / 73
        + 0.45 * (education_num - 1) / 15
        + 0.25 * hours / 99
        + 0.9 * (capital_gain > 5000)
        + 0.1 * (occupation / 13)
    )
    logit = 6.0 * (merit - 0.62)
    p = 1.0 / (1.0 + np.exp(-logit))
    p = np.where(sex == 0.0, p * 0.45, p)  # historical suppression
    y = (rng.random(n) < p).astype(int)

    rows = np.column_stack([
        age, workclass, fnlwgt, education, education_num, marital, occupation,
        relationship, race, sex, capital_gain, capital_loss, hours, country,
    ])
    names = ["age", "workclass", "fnlwgt", "education", "education_num",
             "marital", "occupation", "relationship", "race", "sex",
             "capital_gain", "capital_loss", "hours", "country"]
    return Dataset(names, ["numeric"] * 14, rows, y), names.index("sex")


def main():
    t0 = time.perf_counter()
    dataset, sex_index = census_shaped()
    print(f"generated {dataset.n_rows} rows, positive rate "
          f"{dataset.labels.mean():.3f}, privileged share "
          f"{dataset.rows[:, sex_index].mean():.3f} "
          f"({time.perf_counter() - t0:.1f}s)")
    config = ExperimentConfig(
        n_trees=25, max_depth=None, min_samples_leaf=1, features_per_split="sqrt",
        n_simulations=100, p_max=0.1, alpha=9.0, folds=5, seed=20240601,
        methods=(METHOD_BASELINE, METHOD_THRESHOLD, METHOD_FAIRTTTS),
    )
    t0 = time.perf_counter()
    result = run_experiment_on(dataset, sex_index, "census_shaped", config)
    total = time.perf_counter() - t0
    for method in config.methods:
        agg = result.aggregates[method]
        print(f"{method:<20} acc {agg['accuracy']['mean']:.4f}±{agg['accuracy']['std']:.4f}"
              f"  eod {agg['eod']['mean']:.4f}±{agg['eod']['std']:.4f}"
              f"  di {agg['di']['mean']:.4f}"
              f"  inference {sum(result.timings[method]):.1f}s")
    print(f"total wall time {total:.1f}s")
    eod_b = result.aggregates[METHOD_BASELINE]["eod"]["mean"]
    eod_f = result.aggregates[METHOD_FAIRTTTS]["eod"]["mean"]
    acc_b = result.aggregates[METHOD_BASELINE]["accuracy"]["mean"]
    acc_f = result.aggregates[METHOD_FAIRTTTS]["accuracy"]["mean"]
    print(f"direction: EOD {eod_b:.4f} -> {eod_f:.4f} "
          f"({'improved' if eod_f < eod_b else 'NOT improved'}); "
          f"accuracy {acc_b:.4f} -> {acc_f:.4f} "
          f"({'holds' if acc_f >= acc_b - 0.005 else 'DROPPED beyond 0.005'})")


if __name__ == "__main__":
    main()
