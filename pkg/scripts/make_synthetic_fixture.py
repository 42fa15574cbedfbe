#!/usr/bin/env python3
"""Generate and verify the synthetic screening fixture.

The data simulates a biased loan-screening history: qualification rises
with score1 for everyone, but unprivileged applicants (group=0) were
approved far less often in the mid band and only moderately in the top
band. A depth-limited tree trained on it reliably splits on the protected
column and routes unprivileged applicants toward rejection, which is the
structure the fairness-adjusted traversal is meant to counteract.

The script searches generator seeds until the frozen CSV passes, through
the real pipeline:
  1. exact-mode alpha sweep (single tree, 5 folds): mean EOD non-increasing
     across alphas with at least one strict drop; unprivileged favorable
     rate nondecreasing;
  2. Monte Carlo forest run: EOD(fairttts) < EOD(baseline) and
     accuracy(fairttts) >= accuracy(baseline) - 0.005.

Run from the repository root:  python scripts/make_synthetic_fixture.py
"""

import json
import os
import sys
import tempfile

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fairtree.bench import (  # noqa: E402
    METHOD_BASELINE,
    METHOD_FAIRTTTS,
    ExperimentConfig,
    run_experiment,
    sweep_alpha,
)

ALPHAS = (1.0, 2.0, 4.0, 9.0, 16.0)
N_ROWS = 400


def generate(seed: int, n: int = N_ROWS):
    rng = np.random.default_rng(seed)
    group = (rng.random(n) < 0.5).astype(int)
    score1 = np.round(rng.uniform(0, 10, n) * 20) / 20
    score2 = np.round(rng.uniform(0, 10, n) * 20) / 20
    approve = np.full(n, 0.06)
    mid = (score1 >= 5.0) & (score1 < 8.0)
    top = score1 >= 8.0
    approve[(group == 1) & (mid | top)] = 0.90
    approve[(group == 0) & mid] = 0.25
    approve[(group == 0) & top] = 0.75
    y = (rng.random(n) < approve).astype(int)
    return group, score1, score2, y


def write_fixture(path, group, score1, score2, y):
    lines = ["group,score1,score2,approved"]
    for g, a, b, label in zip(group, score1, score2, y):
        lines.append(f"{g},{a:g},{b:g},{'yes' if label else 'no'}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_config(path, csv_name):
    config = {
        "name": "synthetic_credit",
        "csv_path": csv_name,
        "label_column": "approved",
        "positive_label_value": "yes",
        "negative_label_values": ["no"],
        "protected_column": "group",
        "privileged_values": ["1"],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(config, indent=2) + "\n")


def verify(config_path):
    base = ExperimentConfig(
        dataset_config=config_path,
        n_trees=1,
        max_depth=3,
        features_per_split=None,
        bootstrap=False,
        folds=5,
        methods=(METHOD_BASELINE, METHOD_FAIRTTTS),
        seed=20240601,
        exact=True,
        n_simulations=1,
    )
    sweep = sweep_alpha(base, ALPHAS)
    eods, upos = [], []
    for result in sweep.results:
        eods.append(result.aggregates[METHOD_FAIRTTTS]["eod"]["mean"])
        rates = [
            (r.group_confusion.unprivileged.tp + r.group_confusion.unprivileged.fp)
            / r.group_confusion.unprivileged.n
            for r in result.fold_reports[METHOD_FAIRTTTS]
        ]
        upos.append(float(np.mean(rates)))
    checks = {
        "eod defined": all(e is not None for e in eods),
        "eod non-increasing": all(b <= a + 1e-12 for a, b in zip(eods, eods[1:])),
        "eod strict drop": any(b < a - 1e-9 for a, b in zip(eods, eods[1:])),
        "unpriv rate nondecreasing": all(
            b >= a - 1e-12 for a, b in zip(upos, upos[1:])
        ),
    }
    mc = ExperimentConfig(
        dataset_config=config_path,
        n_trees=15,
        max_depth=None,
        folds=5,
        seed=20240601,
        n_simulations=100,
        p_max=0.1,
        alpha=9.0,
    )
    result = run_experiment(mc)
    acc_b = result.aggregates[METHOD_BASELINE]["accuracy"]["mean"]
    acc_f = result.aggregates[METHOD_FAIRTTTS]["accuracy"]["mean"]
    eod_b = result.aggregates[METHOD_BASELINE]["eod"]["mean"]
    eod_f = result.aggregates[METHOD_FAIRTTTS]["eod"]["mean"]
    checks["mc eod improves"] = eod_f < eod_b
    checks["mc accuracy holds"] = acc_f >= acc_b - 0.005
    stats = {
        "sweep_eod": eods,
        "sweep_unpriv_rate": upos,
        "mc": {"acc_b": acc_b, "acc_f": acc_f, "eod_b": eod_b, "eod_f": eod_f},
    }
    return checks, stats


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "fixtures")
    for seed in range(1, 200):
        group, s1, s2, y = generate(seed)
        with tempfile.TemporaryDirectory() as tmp:
            csv_path = os.path.join(tmp, "synthetic_credit.csv")
            cfg_path = os.path.join(tmp, "synthetic.json")
            write_fixture(csv_path, group, s1, s2, y)
            write_config(cfg_path, "synthetic_credit.csv")
            checks, stats = verify(cfg_path)
        print(f"seed {seed}: {checks}")
        if all(checks.values()):
            write_fixture(os.path.join(out_dir, "synthetic_credit.csv"), group, s1, s2, y)
            write_config(os.path.join(out_dir, "synthetic.json"), "synthetic_credit.csv")
            print(f"frozen fixture from generator seed {seed}")
            print(json.dumps(stats, indent=2))
            return 0
    print("no seed satisfied every check", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
