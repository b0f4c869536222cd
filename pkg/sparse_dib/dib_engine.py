"""
Deterministic Information Bottleneck clustering on a similarity matrix.

Each restart alternates between re-estimating the cluster model
(q(t), q(y|t)) and reassigning every observation to the cluster maximising
ln q(t) - beta * KL(p(y|x_j) || q(y|t)). p(x) is uniform over the n points.

Once the fixed point is reached the restart continues in the large-beta
limit, where only I(Y;T) counts: single moves of observations between
clusters are applied while they raise I(Y;T) and leave no cluster empty.
The plain assignment step cannot leave some of these partitions, because
the moved point still weighs on the model of its old cluster.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .exceptions import DimensionMismatch, EmptyCluster, InsufficientPoints
from .info_core import (
    DiscreteDistribution,
    JointDistribution,
    entropy,
    kl_divergence,
    mutual_information,
)

logger = logging.getLogger(__name__)

MAX_INIT_DRAWS = 1000
# smallest I(Y;T) gain (nats) accepted by the refinement phase
REFINE_TOL = 1e-12


# -------------------------------
# 1. Types
# -------------------------------
@dataclass(frozen=True)
class ClusterModel:
    """Cluster prior q(t) and per-cluster distributions q(y|t) (columns of cond)."""
    prior: np.ndarray
    cond: np.ndarray

    @property
    def k(self):
        return self.prior.shape[0]


@dataclass(frozen=True)
class DibConfig:
    k: int = 2
    beta0: float = 1.0
    beta_growth: float = 1.2
    max_beta_retries: int = 20
    max_iters: int = 100
    restarts: int = 10
    seed: int = 0
    tol_iters: int = 1
    refine: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not self.beta0 > 0:
            raise ValueError("beta0 must be positive")
        if not self.beta_growth > 1:
            raise ValueError("beta_growth must exceed 1")
        if self.max_beta_retries < 0 or self.max_iters < 1 or self.tol_iters < 1:
            raise ValueError("max_beta_retries >= 0, max_iters >= 1 and tol_iters >= 1 required")


@dataclass
class DibResult:
    partition: np.ndarray
    model: ClusterModel
    mi: float
    ht: float
    beta_final: float
    iterations: int
    objective_trace: list = field(default_factory=list)
    # retry_flags[i] is True when entry i was not produced at the beta of entry i-1:
    # an empty-cluster escalation, or the refinement pass (the large-beta limit)
    retry_flags: list = field(default_factory=list)
    collapsed: bool = False
    k_final: int = 1
    restart: int = 0
    converged: bool = True
    refine_moves: int = 0


# -------------------------------
# 2. Helpers
# -------------------------------
def as_partition(labels, n=None):
    labels = np.asarray(labels)
    if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
        raise DimensionMismatch("A partition is a 1-D integer label vector")
    if n is not None and labels.shape[0] != n:
        raise DimensionMismatch(f"Partition has {labels.shape[0]} labels, expected {n}")
    if labels.size and labels.min() < 0:
        raise DimensionMismatch("Cluster labels must be nonnegative")
    return labels


def compact_labels(labels):
    """Relabel to 0..K'-1 preserving the order of the surviving labels."""
    return np.unique(labels, return_inverse=True)[1].reshape(-1)


def partition_entropy(labels):
    counts = np.bincount(labels)
    counts = counts[counts > 0]
    return entropy(DiscreteDistribution(counts / counts.sum()))


def _check_square(P):
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"Similarity matrix must be square, got {P.shape}")
    return P


# -------------------------------
# 3. Operations
# -------------------------------
def update_cluster_model(P, labels, k=None):
    """q(t) = n_t / n and q(.|t) = mean of the member columns of P."""
    P = _check_square(P)
    n = P.shape[0]
    labels = as_partition(labels, n)
    k = int(labels.max()) + 1 if k is None else k
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyCluster(empty[0])

    members = np.zeros((n, k))
    members[np.arange(n), labels] = 1.0
    cond = (P @ members) / counts
    return ClusterModel(prior=counts / n, cond=cond)


def dib_score(P, j, t, model, beta):
    """ln q(t) - beta * KL(P[:, j] || q(.|t)) for one observation and cluster."""
    P = _check_square(P)
    divergence = kl_divergence(
        DiscreteDistribution(P[:, j]), DiscreteDistribution(model.cond[:, t])
    )
    return float(np.log(model.prior[t]) - beta * divergence)


def score_table(P, model, beta):
    """(n, K) table of dib_score for every observation and cluster."""
    # Summed along the support axis so identical columns give identical rows.
    log_ratio = np.log(P)[:, :, None] - np.log(model.cond)[:, None, :]
    divergence = (P[:, :, None] * log_ratio).sum(axis=0)
    return np.log(model.prior)[None, :] - beta * divergence


def assign_step(P, model, beta):
    """Assign each observation to its best-scoring cluster; ties go to the lowest index."""
    P = _check_square(P)
    return np.argmax(score_table(P, model, beta), axis=1)


def mutual_information_yt(P, labels):
    """I(Y;T) for the joint m(y_i, t) = (1/n) sum of member columns of P."""
    P = _check_square(P)
    n = P.shape[0]
    labels = as_partition(labels, n)
    k = int(labels.max()) + 1
    members = np.zeros((n, k))
    members[np.arange(n), labels] = 1.0
    joint = (P @ members) / n
    joint = joint[:, members.sum(axis=0) > 0]
    return mutual_information(JointDistribution(joint / joint.sum()))


def _objective(P, labels, beta):
    return partition_entropy(labels) - beta * mutual_information_yt(P, labels)


def _cluster_terms(joint, mass, log_py):
    """Per-cluster share of I(Y;T): sum_i m ln m - q ln q - sum_i m ln p(y_i), over axis 0."""
    weights = log_py.reshape((-1,) + (1,) * (joint.ndim - 1))
    return (xlogy(joint, joint) - joint * weights).sum(axis=0) - xlogy(mass, mass)


def refine_partition(P, labels, max_moves=None):
    """
    Hill-climb I(Y;T) by moving one group of observations at a time.

    A group is a set of observations with identical columns of P that share
    a cluster; groups always move whole, so duplicates stay together. Each
    step applies the single move with the largest gain (lowest group, then
    lowest cluster, on ties). Moves that would empty a cluster are never
    taken; the climb stops when no move gains more than REFINE_TOL.

    Returns:
        tuple: (labels, number of moves applied)
    """
    P = _check_square(P)
    n = P.shape[0]
    labels = as_partition(labels, n).copy()
    k = int(labels.max()) + 1
    if k < 2:
        return labels, 0
    max_moves = n * n if max_moves is None else max_moves

    column_ids = np.unique(P.T, axis=0, return_inverse=True)[1].reshape(-1)
    group_of = np.unique(np.column_stack([column_ids, labels]), axis=0,
                         return_inverse=True)[1].reshape(-1)
    g = int(group_of.max()) + 1
    members = np.zeros((n, g))
    members[np.arange(n), group_of] = 1.0
    group_joint = (P @ members) / n
    group_size = members.sum(axis=0).astype(int)
    group_mass = group_size / n
    group_label = np.zeros(g, dtype=int)
    group_label[group_of] = labels
    log_py = np.log(P.mean(axis=1))
    rows = np.arange(g)

    moves = 0
    while moves < max_moves:
        onehot = np.zeros((g, k))
        onehot[rows, group_label] = 1.0
        joint = group_joint @ onehot
        mass = group_mass @ onehot
        base = _cluster_terms(joint, mass, log_py)

        own = group_label
        removed = _cluster_terms(
            np.maximum(joint[:, own] - group_joint, 0.0),
            np.maximum(mass[own] - group_mass, 0.0),
            log_py,
        ) - base[own]
        added = _cluster_terms(
            joint[:, None, :] + group_joint[:, :, None],
            mass[None, :] + group_mass[:, None],
            log_py,
        ) - base[None, :]
        gain = removed[:, None] + added
        gain[rows, own] = -np.inf
        cluster_size = np.bincount(own, weights=group_size, minlength=k)
        gain[cluster_size[own] == group_size, :] = -np.inf

        best = np.unravel_index(np.argmax(gain), gain.shape)
        if not gain[best] > REFINE_TOL:
            break
        group_label[best[0]] = best[1]
        moves += 1

    return group_label[group_of], moves


def initial_partition(n, k, rng):
    """Uniform random labels, redrawn until no cluster is empty."""
    for _ in range(MAX_INIT_DRAWS):
        labels = rng.integers(0, k, size=n)
        if np.bincount(labels, minlength=k).min() > 0:
            return labels
    # Guaranteed fallback: one seed point per cluster, the rest uniform
    labels = rng.integers(0, k, size=n)
    labels[rng.permutation(n)[:k]] = np.arange(k)
    return labels


def restart_rng(seed, restart):
    """Independent random stream per (seed, restart index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(restart)]))


def _run_restart(P, cfg, restart):
    n = P.shape[0]
    rng = restart_rng(cfg.seed, restart)
    labels = initial_partition(n, cfg.k, rng)
    k = cfg.k
    beta = cfg.beta0
    trace = [_objective(P, labels, beta)]
    retry_flags = [False]
    collapsed = False
    unchanged = 0
    iterations = 0
    converged = False

    while iterations < cfg.max_iters:
        iterations += 1
        model = update_cluster_model(P, labels, k)
        new_labels = assign_step(P, model, beta)
        retried = False

        retries = 0
        while np.bincount(new_labels, minlength=k).min() == 0 and retries < cfg.max_beta_retries:
            # discard the pass and strengthen the relevance term
            beta *= cfg.beta_growth
            retries += 1
            retried = True
            logger.debug("Restart %d: empty cluster, beta raised to %.4g", restart, beta)
            new_labels = assign_step(P, model, beta)

        if np.bincount(new_labels, minlength=k).min() == 0:
            new_labels = compact_labels(new_labels)
            k = int(new_labels.max()) + 1
            collapsed = True
            retried = True
            logger.warning("Restart %d: accepted collapse to %d cluster(s) at beta=%.4g",
                           restart, k, beta)

        value = _objective(P, new_labels, beta)
        if not retried and value > trace[-1]:
            # an increase here is rounding on a tie move; keep the current partition
            new_labels, value = labels, trace[-1]

        if np.array_equal(new_labels, labels):
            unchanged += 1
        else:
            unchanged = 0
        labels = new_labels
        trace.append(value)
        retry_flags.append(retried)
        logger.debug("Restart %d pass %d: objective %.10g", restart, iterations, trace[-1])

        if unchanged >= cfg.tol_iters:
            converged = True
            break

    moves = 0
    if cfg.refine:
        labels, moves = refine_partition(P, labels, max_moves=cfg.max_iters * n)
        if moves:
            iterations += 1
            trace.append(_objective(P, labels, beta))
            retry_flags.append(True)
            logger.debug("Restart %d: refinement applied %d move(s), objective %.10g",
                         restart, moves, trace[-1])

    return DibResult(
        partition=labels,
        model=update_cluster_model(P, labels, k),
        mi=mutual_information_yt(P, labels),
        ht=partition_entropy(labels),
        beta_final=beta,
        iterations=iterations,
        objective_trace=trace,
        retry_flags=retry_flags,
        collapsed=collapsed,
        k_final=k,
        restart=restart,
        converged=converged,
        refine_moves=moves,
    )


def run_dib(P, cfg):
    """Best of cfg.restarts DIB runs: highest I(Y;T), then lowest H(T), then lowest restart."""
    P = _check_square(P)
    n = P.shape[0]
    if n < cfg.k:
        raise InsufficientPoints(f"Need at least k={cfg.k} observations, got {n}", n=n, k=cfg.k)

    if cfg.k == 1:
        labels = np.zeros(n, dtype=int)
        return DibResult(
            partition=labels,
            model=update_cluster_model(P, labels, 1),
            mi=0.0,
            ht=0.0,
            beta_final=cfg.beta0,
            iterations=0,
            objective_trace=[0.0],
            retry_flags=[False],
            k_final=1,
        )

    best = None
    for restart in range(cfg.restarts):
        result = _run_restart(P, cfg, restart)
        if best is None or (result.mi, -result.ht) > (best.mi, -best.ht):
            best = result

    logger.debug("DIB winner: restart %d, I(Y;T)=%.6f, H(T)=%.6f",
                 best.restart, best.mi, best.ht)
    return best
