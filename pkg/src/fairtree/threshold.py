"""Group-specific decision-threshold post-processing baseline.

Fits one threshold per group by exhaustive search over the percent grid
{0.00, 0.01, ..., 1.00}^2, minimizing equalized odds difference on the
fitting data. Ties break by higher accuracy, then smaller threshold gap,
then lexicographically. Deterministic throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

GRID = [i / 100.0 for i in range(101)]


@dataclass(frozen=True)
class ThresholdPolicy:
    threshold_privileged: float
    threshold_unprivileged: float
    objective_achieved: Optional[float]
    warnings: tuple = ()

    def to_dict(self) -> dict:
        return {
            "threshold_privileged": self.threshold_privileged,
            "threshold_unprivileged": self.threshold_unprivileged,
            "objective_achieved": self.objective_achieved,
            "warnings": list(self.warnings),
        }


def _validate(scores, y_true, group):
    scores = np.asarray(scores, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.int64)
    group = np.asarray(group, dtype=np.int64)
    if not (scores.shape == y_true.shape == group.shape) or scores.ndim != 1:
        raise ValueError("scores, y_true and group must be equal-length vectors")
    if scores.size == 0:
        raise ValueError("empty input")
    if scores.min() < 0.0 or scores.max() > 1.0:
        raise ValueError("scores must lie in [0, 1]")
    if not np.isin(y_true, (0, 1)).all() or not np.isin(group, (0, 1)).all():
        raise ValueError("y_true and group must be binary")
    if not (group == 1).any() or not (group == 0).any():
        raise ValueError("both groups required")
    return scores, y_true, group


def _per_threshold_cells(scores, y_true):
    """TP/FP/TN/FN counts at each grid threshold (prediction: score >= t)."""
    grid = np.asarray(GRID)
    pred = scores[None, :] >= grid[:, None]
    pos = y_true == 1
    tp = (pred & pos[None, :]).sum(axis=1)
    fp = (pred & ~pos[None, :]).sum(axis=1)
    fn = pos.sum() - tp
    tn = (~pos).sum() - fp
    return tp, fp, tn, fn


def fit_threshold_policy(scores, y_true, group) -> ThresholdPolicy:
    """Grid-search group thresholds minimizing EOD on the fitting data.

    When EOD is undefined on the fitting data (a group lacks positives or
    negatives) every grid point is degenerate; falls back to (0.5, 0.5)
    with a warning."""
    scores, y_true, group = _validate(scores, y_true, group)
    priv = group == 1
    tp_p, fp_p, tn_p, fn_p = _per_threshold_cells(scores[priv], y_true[priv])
    tp_u, fp_u, tn_u, fn_u = _per_threshold_cells(scores[~priv], y_true[~priv])
    pos_p = int(tp_p[0] + fn_p[0])
    neg_p = int(fp_p[0] + tn_p[0])
    pos_u = int(tp_u[0] + fn_u[0])
    neg_u = int(fp_u[0] + tn_u[0])
    if 0 in (pos_p, neg_p, pos_u, neg_u):
        return ThresholdPolicy(
            threshold_privileged=0.5,
            threshold_unprivileged=0.5,
            objective_achieved=None,
            warnings=(
                "EOD undefined on fitting data for every threshold pair; "
                "falling back to thresholds (0.5, 0.5)",
            ),
        )
    n = scores.size
    tpr_p = tp_p / pos_p
    fpr_p = fp_p / neg_p
    tpr_u = tp_u / pos_u
    fpr_u = fp_u / neg_u
    # matrices indexed [privileged threshold, unprivileged threshold]
    eod = (
        np.abs(tpr_u[None, :] - tpr_p[:, None])
        + np.abs(fpr_u[None, :] - fpr_p[:, None])
    ) / 2.0
    correct = (tp_p + tn_p)[:, None] + (tp_u + tn_u)[None, :]
    acc = correct / n
    grid = np.asarray(GRID)
    gap = np.abs(grid[:, None] - grid[None, :])
    # selection: minimize (eod, -acc, gap, t_priv, t_unpriv) lexicographically
    tp_idx = np.repeat(np.arange(101), 101)
    tu_idx = np.tile(np.arange(101), 101)
    order = np.lexsort(
        (tu_idx, tp_idx, gap.ravel(), -acc.ravel(), eod.ravel())
    )
    best = order[0]
    ip, iu = int(tp_idx[best]), int(tu_idx[best])
    return ThresholdPolicy(
        threshold_privileged=GRID[ip],
        threshold_unprivileged=GRID[iu],
        objective_achieved=float(eod[ip, iu]),
    )


def apply_threshold_policy(policy: ThresholdPolicy, scores, group) -> np.ndarray:
    """Predict 1 iff score >= the threshold of the sample's group."""
    scores = np.asarray(scores, dtype=np.float64)
    group = np.asarray(group, dtype=np.int64)
    if scores.shape != group.shape or scores.ndim != 1:
        raise ValueError("scores and group must be equal-length vectors")
    cut = np.where(
        group == 1, policy.threshold_privileged, policy.threshold_unprivileged
    )
    return (scores >= cut).astype(np.int64)
