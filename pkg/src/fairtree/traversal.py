"""Fairness-adjusted probabilistic tree traversal.

At every internal node a traversal may take the child opposite the
deterministic one. The flip chance decays linearly with the sample's
distance to the threshold, normalized by the node's stored scale, and is
boosted by ``alpha`` (capped at 0.5) at protected-attribute nodes whose
deterministic child routes an unprivileged sample toward the unfavorable
class. Monte Carlo aggregation over ``n_simulations`` traversals yields a
class distribution; ``exact_path_distribution`` computes the same
distribution in closed form for verification.

All randomness comes from counter-based streams keyed by
(seed, stream_id, simulation, tree), so results are independent of
evaluation order and batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import ConfigError, EnumerationLimitError
from .tree import (
    DecisionTree,
    FlatTree,
    Forest,
    InternalNode,
    LeafNode,
    _check_sample,
    flatten_tree,
)

VOTE_MAJORITY = "majority_vote"
VOTE_MEAN = "mean_distribution"


@dataclass(frozen=True)
class FairnessSpec:
    """Which feature is protected and which outcomes count as favorable."""

    protected_feature: int
    privileged_value: float = 1.0
    unprivileged_value: float = 0.0
    favorable_class: int = 1
    unfavorable_class: int = 0

    def __post_init__(self):
        if self.protected_feature < 0:
            raise ConfigError("protected_feature must be a feature index")
        if self.favorable_class == self.unfavorable_class:
            raise ConfigError("favorable and unfavorable classes must differ")
        if {self.favorable_class, self.unfavorable_class} != {0, 1}:
            raise ConfigError("classes must be 0 and 1")
        if self.privileged_value == self.unprivileged_value:
            raise ConfigError("privileged and unprivileged values must differ")


@dataclass(frozen=True)
class TraversalConfig:
    """Monte Carlo traversal hyperparameters."""

    n_simulations: int = 100
    p_max: float = 0.1
    alpha: float = 9.0
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n_simulations, int) or self.n_simulations < 1:
            raise ConfigError("n_simulations must be a positive integer")
        if not 0.0 <= self.p_max <= 0.5:
            raise ConfigError("p_max must lie in [0, 0.5]")
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise ConfigError("alpha must be finite and >= 0")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")


@dataclass(frozen=True)
class PredictionDistribution:
    """Per-class probabilities; n_simulations_used == 0 marks an exact result."""

    probs: tuple
    n_simulations_used: int

    def __post_init__(self):
        if len(self.probs) != 2 or any(
            not -1e-9 <= p <= 1.0 + 1e-9 for p in self.probs
        ):
            raise ValueError("probs must be two probabilities")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("probs must sum to 1")

    @property
    def predicted_class(self) -> int:
        # argmax with ties toward class 0
        return 1 if self.probs[1] > self.probs[0] else 0


def flip_probability(node: InternalNode, sample, config: TraversalConfig) -> float:
    """Distance-based flip chance, clamped to [0, p_max].

    Nodes flagged uniform_distance saw a single training distance (0/1
    encoded splits); distance carries no signal there and the flip chance
    saturates at p_max.
    """
    if node.uniform_distance:
        return config.p_max
    d = abs(float(sample[node.feature_index]) - node.threshold)
    if node.scale > 0.0:
        base = config.p_max - d / node.scale
    else:
        base = config.p_max if d == 0.0 else 0.0
    return min(max(base, 0.0), config.p_max)


def _deterministic_child_majority(node: InternalNode, sample) -> int:
    if float(sample[node.feature_index]) <= node.threshold:
        return node.left_majority
    return node.right_majority


def adjusted_flip_probability(
    base: float,
    node: InternalNode,
    sample,
    spec: FairnessSpec,
    config: TraversalConfig,
) -> float:
    """Apply the fairness boost min(alpha * base, 0.5) when the node splits
    on the protected feature, the sample is unprivileged, and the
    deterministic child's subtree majority is the unfavorable class.
    With alpha = 0 the boost suppresses flips entirely at triggered nodes
    (0 * base == 0); elsewhere the base chance is returned unchanged."""
    if node.feature_index != spec.protected_feature:
        return base
    if float(sample[spec.protected_feature]) != spec.unprivileged_value:
        return base
    if _deterministic_child_majority(node, sample) != spec.unfavorable_class:
        return base
    return min(config.alpha * base, 0.5)


def traverse_once(
    tree: DecisionTree,
    sample,
    spec: FairnessSpec,
    config: TraversalConfig,
    rng: "_rng.TraversalStream",
) -> int:
    """One probabilistic root-to-leaf walk; returns the leaf's class.

    Consumes one uniform per visited internal node. With p_max == 0 every
    flip chance is 0 and the walk equals the deterministic traversal for
    any stream state."""
    sample = _check_sample(sample, tree.n_features)
    node = tree.root
    while isinstance(node, InternalNode):
        base = flip_probability(node, sample, config)
        p_flip = adjusted_flip_probability(base, node, sample, spec, config)
        go_left = float(sample[node.feature_index]) <= node.threshold
        if rng.next_uniform() < p_flip:
            go_left = not go_left
        node = node.left if go_left else node.right
    return node.predicted_class


def _flip_probs_batch(flat: FlatTree, nodes, x_values, protected_mask, unpriv_mask,
                      det_majority, spec, config):
    """Vectorized flip probabilities for lanes sitting at internal nodes."""
    scale = flat.scale[nodes]
    d = np.abs(x_values - flat.threshold[nodes])
    safe_scale = np.where(scale > 0.0, scale, 1.0)
    base = config.p_max - d / safe_scale
    base = np.where(scale > 0.0, base, np.where(d == 0.0, config.p_max, 0.0))
    base = np.clip(base, 0.0, config.p_max)
    base = np.where(flat.uniform_distance[nodes], config.p_max, base)
    trigger = (
        protected_mask
        & unpriv_mask
        & (det_majority == spec.unfavorable_class)
    )
    return np.where(trigger, np.minimum(config.alpha * base, 0.5), base)


def _traverse_batch(flat: FlatTree, X, spec, config, keys):
    """Walk all lanes through one tree; returns per-lane leaf classes.

    X has one row per lane; keys holds each lane's stream key. Lane j's
    step-i uniform is draw i of its stream, matching traverse_once."""
    n_lanes = X.shape[0]
    node = np.zeros(n_lanes, dtype=np.int32)
    lanes = np.arange(n_lanes)
    for step in range(flat.max_depth):
        feat = flat.feature[node]
        active = feat >= 0
        if not active.any():
            break
        a_lanes = lanes[active]
        a_nodes = node[active]
        a_feat = feat[active]
        x_vals = X[a_lanes, a_feat]
        go_left_det = x_vals <= flat.threshold[a_nodes]
        det_majority = np.where(
            go_left_det,
            flat.left_majority[a_nodes],
            flat.right_majority[a_nodes],
        )
        protected_mask = a_feat == spec.protected_feature
        unpriv_mask = X[a_lanes, spec.protected_feature] == spec.unprivileged_value
        p_flip = _flip_probs_batch(
            flat, a_nodes, x_vals, protected_mask, unpriv_mask,
            det_majority, spec, config,
        )
        u = _rng.uniforms_at_array(keys[active], step)
        go_left = go_left_det ^ (u < p_flip)
        node[active] = np.where(go_left, flat.left[a_nodes], flat.right[a_nodes])
    return flat.leaf_class[node]


def _lane_keys(config, stream_ids, n_sims, tree_index):
    """Stream keys for the (sample, simulation) lane grid of one tree."""
    sid = np.repeat(np.asarray(stream_ids, dtype=np.uint64), n_sims)
    sim = np.tile(np.arange(n_sims, dtype=np.uint64), len(stream_ids))
    return _rng.stream_key_array(config.seed, sid, sim, tree_index)


def _simulate_batch(trees, X, spec, config, stream_ids, aggregation):
    """Shared Monte Carlo core; returns per-sample favorable-vote counts
    plus the denominator."""
    n = X.shape[0]
    S = config.n_simulations
    T = len(trees)
    X_lanes = np.repeat(np.asarray(X, dtype=np.float64), S, axis=0)
    vote_sum = np.zeros(n * S, dtype=np.int32)
    for t, tree in enumerate(trees):
        flat = tree if isinstance(tree, FlatTree) else flatten_tree(tree)
        keys = _lane_keys(config, stream_ids, S, t)
        vote_sum += _traverse_batch(flat, X_lanes, spec, config, keys)
    if aggregation == VOTE_MEAN:
        counts = vote_sum.reshape(n, S).sum(axis=1, dtype=np.int64)
        return counts, S * T
    if aggregation != VOTE_MAJORITY:
        raise ConfigError(f"unknown aggregation {aggregation!r}")
    sim_votes = (2 * vote_sum.reshape(n, S) > T).astype(np.int64)
    return sim_votes.sum(axis=1), S


def simulate(
    tree: DecisionTree,
    sample,
    spec: FairnessSpec,
    config: TraversalConfig,
    stream_id: int = 0,
) -> PredictionDistribution:
    """Monte Carlo class distribution over n_simulations traversals.

    Simulation s draws from the stream keyed by
    (seed, stream_id, s, tree=0), so repeated calls are reproducible and
    independent of other samples."""
    sample = _check_sample(sample, tree.n_features)
    counts, denom = _simulate_batch(
        [tree], sample.reshape(1, -1), spec, config, [stream_id], VOTE_MAJORITY
    )
    favorable = int(counts[0])
    return PredictionDistribution(
        probs=((denom - favorable) / denom, favorable / denom),
        n_simulations_used=config.n_simulations,
    )


def predict_fair(
    forest: Forest,
    sample,
    spec: FairnessSpec,
    config: TraversalConfig,
    stream_id: int = 0,
    aggregation: str = VOTE_MAJORITY,
):
    """Fairness-adjusted forest prediction for one sample.

    Each simulation traverses every tree probabilistically and takes the
    majority vote (ties to class 0); the distribution aggregates the
    simulation votes. Returns (predicted class, distribution)."""
    sample = _check_sample(sample, forest.trees[0].n_features)
    preds, probs = predict_fair_batch(
        forest, sample.reshape(1, -1), spec, config,
        stream_ids=[stream_id], aggregation=aggregation,
    )
    dist = PredictionDistribution(
        probs=(float(probs[0, 0]), float(probs[0, 1])),
        n_simulations_used=config.n_simulations,
    )
    return int(preds[0]), dist


def predict_fair_batch(
    forest: Forest,
    X,
    spec: FairnessSpec,
    config: TraversalConfig,
    stream_ids=None,
    aggregation: str = VOTE_MAJORITY,
    max_lanes: int = 2_000_000,
):
    """Vectorized predict_fair over a sample matrix.

    stream_ids defaults to the row index; pass stable ids (e.g. dataset row
    numbers) to make results invariant to batch composition. Returns
    (predictions, probs) with probs[i] = (P(class 0), P(class 1))."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != forest.trees[0].n_features:
        raise ValueError("X must be (n_samples, n_features)")
    n = X.shape[0]
    if stream_ids is None:
        stream_ids = np.arange(n)
    stream_ids = np.asarray(stream_ids, dtype=np.uint64)
    if stream_ids.shape != (n,):
        raise ValueError("stream_ids must have one entry per sample")
    flats = [flatten_tree(t) for t in forest.trees]
    counts = np.empty(n, dtype=np.int64)
    denom = 1
    chunk = max(1, max_lanes // max(1, config.n_simulations))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        c, denom = _simulate_batch(
            flats, X[start:stop], spec, config, stream_ids[start:stop], aggregation
        )
        counts[start:stop] = c
    probs = np.stack([(denom - counts) / denom, counts / denom], axis=1)
    preds = (2 * counts > denom).astype(np.int64)
    return preds, probs


def exact_path_distribution(
    tree: DecisionTree,
    sample,
    spec: FairnessSpec,
    config: TraversalConfig,
    max_enumeration_depth: int = 12,
) -> PredictionDistribution:
    """Closed-form traversal distribution by enumerating every root-leaf
    path; the verification oracle for the Monte Carlo estimate."""
    sample = _check_sample(sample, tree.n_features)
    if tree.depth() > max_enumeration_depth:
        raise EnumerationLimitError("enumeration limit exceeded")
    probs = [0.0, 0.0]

    def walk(node, prob, depth):
        if isinstance(node, LeafNode):
            probs[node.predicted_class] += prob
            return
        base = flip_probability(node, sample, config)
        p_flip = adjusted_flip_probability(base, node, sample, spec, config)
        det_left = float(sample[node.feature_index]) <= node.threshold
        det_child, flip_child = (
            (node.left, node.right) if det_left else (node.right, node.left)
        )
        if prob * (1.0 - p_flip) > 0.0:
            walk(det_child, prob * (1.0 - p_flip), depth + 1)
        if prob * p_flip > 0.0:
            walk(flip_child, prob * p_flip, depth + 1)

    walk(tree.root, 1.0, 0)
    return PredictionDistribution(probs=tuple(probs), n_simulations_used=0)
