"""
Sparse DIB: joint clustering and feature weighting.

The outer loop alternates a DIB run on the weighted similarity matrix with a
weight update w_j proportional to I(Y_j; T), projected onto
C = {w >= 0, ||w||_2 <= 1, ||w||_1 <= u} by Dykstra's algorithm.
"""

import hashlib
import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.cluster.vq import kmeans2

from .dib_engine import DibConfig, DibResult, mutual_information_yt, run_dib
from .exceptions import DegenerateMI, DimensionMismatch, InsufficientPoints, NonConvergence
from .info_core import normalized_weight_entropy
from .similarity import (
    DEFAULT_FLOOR,
    as_bandwidths,
    as_data_matrix,
    default_bandwidths,
    per_feature_similarity,
    similarity_matrix,
)

logger = logging.getLogger(__name__)

NONZERO_TOL = 1e-12
DEGENERATE_MI_TOL = 1e-15
PLATEAU_MIN_LENGTH = 3
# relative slack for calling the L1 budget binding
BUDGET_TOL = 1e-6


# -------------------------------
# 1. Types
# -------------------------------
@dataclass(frozen=True)
class WeightVector:
    """Feature weights together with the L1 budget they were projected under."""
    values: np.ndarray
    budget: float
    converged: bool = True

    @property
    def nonzero_count(self):
        return int(np.sum(self.values > NONZERO_TOL))

    @property
    def support(self):
        return tuple(int(i) for i in np.flatnonzero(self.values > NONZERO_TOL))

    @property
    def budget_active(self):
        """True when the L1 budget binds; past that point u no longer shapes the weights."""
        return bool(np.sum(self.values) >= self.budget * (1.0 - BUDGET_TOL))


@dataclass(frozen=True)
class SparseDibConfig:
    u: float = 2.0
    eps: float = 1e-5
    max_outer: int = 50
    init: str = 'uniform'
    dib: DibConfig = field(default_factory=DibConfig)
    dykstra_tol: float = 1e-10
    dykstra_max: int = 1000
    kmeans_restarts: int = 10
    floor: float = DEFAULT_FLOOR
    strict: bool = False
    # Starting exponents; overrides `init` when given (used by the u sweep)
    initial_weights: Optional[tuple] = None

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError("u must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        if self.init not in ('uniform', 'warm_start'):
            raise ValueError("init must be 'uniform' or 'warm_start'")


@dataclass
class SparseDibResult:
    partition: np.ndarray
    weights: WeightVector
    per_feature_mi: np.ndarray
    outer_iterations: int
    converged: bool
    weight_entropy: float
    nonzero_count: int
    weight_changes: list = field(default_factory=list)
    dib: Optional[DibResult] = None
    bandwidths: Optional[np.ndarray] = None


@dataclass(frozen=True)
class TuningPoint:
    u: float
    normalized_entropy: float
    nonzero_count: int
    support: tuple
    converged: bool = True
    budget_active: bool = True

    @property
    def support_hash(self):
        text = ','.join(str(i) for i in self.support)
        return hashlib.sha1(text.encode('utf-8')).hexdigest()[:12]


@dataclass(frozen=True)
class Plateau:
    u_low: float
    u_high: float
    support: tuple
    length: int


@dataclass
class TuningTrajectory:
    points: list
    plateau: Optional[Plateau] = None
    monotonicity_violations: list = field(default_factory=list)
    closest_to_target: Optional[TuningPoint] = None


# -------------------------------
# 2. Projection onto C
# -------------------------------
def project_l2_ball(v):
    norm = np.linalg.norm(v)
    return v / norm if norm > 1 else v


def project_l1_orthant(v, u):
    """Projection onto {w >= 0, ||w||_1 <= u}: clip, then soft-threshold onto the simplex."""
    w = np.maximum(v, 0.0)
    if w.sum() <= u:
        return w
    ordered = np.sort(w)[::-1]
    cumulative = np.cumsum(ordered) - u
    ranks = np.arange(1, w.shape[0] + 1)
    rho = np.flatnonzero(ordered - cumulative / ranks > 0)[-1]
    theta = cumulative[rho] / (rho + 1)
    return np.maximum(w - theta, 0.0)


def project_dykstra(v, u, tol=1e-10, max_iter=1000, strict=False):
    """Euclidean projection of v onto C via Dykstra's alternating projections."""
    v = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise DimensionMismatch("Cannot project a vector with non-finite entries")
    if not u > 0:
        raise ValueError("u must be positive")

    x = v.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    converged = False
    change = np.inf
    for _ in range(max_iter):
        y = project_l2_ball(x + p)
        p = x + p - y
        x_new = project_l1_orthant(y + q, u)
        q = y + q - x_new
        change = np.max(np.abs(x_new - x))
        x = x_new
        if change < tol:
            converged = True
            break

    # x lies in the L1 set; a radial shrink keeps it there and fixes L2 round-off
    x = project_l2_ball(x)

    if not converged:
        logger.warning("Dykstra projection stopped after %d iterations (last change %.3g)",
                       max_iter, change)
        if strict:
            raise NonConvergence(f"Dykstra projection did not converge in {max_iter} iterations",
                                 last_change=float(change))
    return WeightVector(values=x, budget=float(u), converged=converged)


# -------------------------------
# 3. Weight updates
# -------------------------------
def uniform_weights(p):
    return np.full(p, 1.0 / np.sqrt(p))


def per_feature_mi_vector(X, b, labels, floor=DEFAULT_FLOOR):
    """I(Y_m; T) for every feature m against the partition."""
    X = as_data_matrix(X)
    p = X.shape[1]
    b = as_bandwidths(b, p)
    return np.array([
        mutual_information_yt(per_feature_similarity(X, b, m, floor), labels)
        for m in range(p)
    ])


def update_weights(mi, cfg):
    """Rescale the MI vector to unit L2 norm and project it onto C with budget cfg.u."""
    mi = np.asarray(mi, dtype=float).ravel()
    if np.any(mi < 0):
        raise ValueError("Mutual informations must be nonnegative")
    if np.all(mi <= DEGENERATE_MI_TOL):
        raise DegenerateMI("Every feature carries zero information about the partition")
    return project_dykstra(mi / np.linalg.norm(mi), cfg.u, cfg.dykstra_tol,
                           cfg.dykstra_max, cfg.strict)


def feature_scales(X):
    """Sample standard deviation per feature; constant features get 1."""
    X = as_data_matrix(X)
    sigma = X.std(axis=0, ddof=1)
    sigma[sigma == 0] = 1.0
    return sigma


def standardize(X):
    """Per-feature z-scores with the sample standard deviation."""
    X = as_data_matrix(X)
    return (X - X.mean(axis=0)) / feature_scales(X)


def kmeans_partition(X, k, seed, restarts):
    """Best of `restarts` Lloyd runs with k-means++ seeding, by within-cluster sum of squares."""
    X = as_data_matrix(X)
    if X.shape[0] < k:
        raise InsufficientPoints(f"Need at least k={k} observations, got {X.shape[0]}")
    if k == 1:
        return np.zeros(X.shape[0], dtype=int)

    Z = standardize(X)
    best_labels, best_wcss = None, np.inf
    for restart in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(restart)]))
        with warnings.catch_warnings():
            # scipy warns when a cluster empties during Lloyd iterations
            warnings.simplefilter('ignore')
            centroids, labels = kmeans2(Z, k, iter=100, minit='++', seed=rng)
        wcss = float(np.sum((Z - centroids[labels]) ** 2))
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    logger.debug("K-Means warm start: best WCSS %.6g over %d restarts", best_wcss, restarts)
    return best_labels


def warm_start_weights(X, b, k, seed, kmeans_restarts, cfg):
    """Weights from per-feature MI against a K-Means partition of standardized X."""
    labels = kmeans_partition(X, k, seed, kmeans_restarts)
    mi = per_feature_mi_vector(X, b, labels, cfg.floor)
    return update_weights(mi, cfg)


# -------------------------------
# 4. Sparse DIB
# -------------------------------
def _initial_weights(X, b, cfg):
    p = X.shape[1]
    if cfg.initial_weights is not None:
        w = np.asarray(cfg.initial_weights, dtype=float)
        if w.shape != (p,):
            raise DimensionMismatch(f"Expected {p} initial weights, got {w.shape}")
        return w
    if cfg.init == 'warm_start':
        return warm_start_weights(X, b, cfg.dib.k, cfg.dib.seed, cfg.kmeans_restarts, cfg).values
    return uniform_weights(p)


def run_sparse_dib(X, cfg, bandwidths=None):
    """Alternate DIB clustering and weight updates until the relative L1 change < eps."""
    X = as_data_matrix(X)
    b = default_bandwidths(X) if bandwidths is None else as_bandwidths(bandwidths, X.shape[1])
    w = _initial_weights(X, b, cfg)
    logger.info("Sparse DIB start: n=%d, p=%d, k=%d, u=%g, init=%s",
                X.shape[0], X.shape[1], cfg.dib.k, cfg.u,
                'chained' if cfg.initial_weights is not None else cfg.init)

    changes = []
    converged = False
    for outer in range(1, cfg.max_outer + 1):
        P = similarity_matrix(X, b, w, cfg.floor)
        dib = run_dib(P, cfg.dib)
        mi = per_feature_mi_vector(X, b, dib.partition, cfg.floor)
        weights = update_weights(mi, cfg)

        change = float(np.abs(weights.values - w).sum() / np.abs(w).sum())
        changes.append(change)
        w = weights.values
        logger.info("Outer iteration %d: relative weight change %.3g, %d nonzero",
                    outer, change, weights.nonzero_count)
        if change < cfg.eps:
            converged = True
            break

    if not converged:
        logger.warning("Sparse DIB reached max_outer=%d without converging", cfg.max_outer)
        if cfg.strict:
            raise NonConvergence(f"Sparse DIB did not converge in {cfg.max_outer} iterations",
                                 last_change=changes[-1])

    return SparseDibResult(
        partition=dib.partition,
        weights=weights,
        per_feature_mi=mi,
        outer_iterations=outer,
        converged=converged,
        weight_entropy=normalized_weight_entropy(weights),
        nonzero_count=weights.nonzero_count,
        weight_changes=changes,
        dib=dib,
        bandwidths=b,
    )


# -------------------------------
# 5. Sparsity tuning
# -------------------------------
def _selects(pt, p):
    return pt.budget_active and (p is None or len(pt.support) < p)


def find_plateau(points, min_length=PLATEAU_MIN_LENGTH, p=None):
    """
    Longest run of consecutive grid points sharing one support; ties go to smaller u.

    Only points that actually select features count: the L1 budget must bind,
    and with p given the support must leave at least one feature out. Past
    the saturation point every larger u returns the same full support.
    """
    best = None
    start = 0
    for end in range(1, len(points) + 1):
        if (end == len(points) or points[end].support != points[start].support
                or _selects(points[end], p) != _selects(points[start], p)):
            length = end - start
            if (_selects(points[start], p) and length >= min_length
                    and (best is None or length > best.length)):
                best = Plateau(points[start].u, points[end - 1].u, points[start].support, length)
            start = end
    return best


def tune_sparsity(X, cfg, u_grid, bandwidths=None, chain=True, target_count=None):
    """Run Sparse DIB over an ascending u grid and record the weight-entropy trajectory."""
    X = as_data_matrix(X)
    grid = [float(u) for u in u_grid]
    if not grid:
        raise ValueError("u_grid must not be empty")
    if any(u <= 0 for u in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("u_grid must be strictly ascending and positive")
    b = default_bandwidths(X) if bandwidths is None else as_bandwidths(bandwidths, X.shape[1])

    points = []
    previous = None
    for u in grid:
        run_cfg = replace(cfg, u=u)
        if chain and previous is not None:
            run_cfg = replace(run_cfg, initial_weights=tuple(previous))
        result = run_sparse_dib(X, run_cfg, b)
        previous = result.weights.values
        points.append(TuningPoint(
            u=u,
            normalized_entropy=result.weight_entropy,
            nonzero_count=result.nonzero_count,
            support=result.weights.support,
            converged=result.converged,
            budget_active=result.weights.budget_active,
        ))

    violations = [
        (points[i].u, points[i + 1].u)
        for i in range(len(points) - 1)
        if points[i + 1].nonzero_count < points[i].nonzero_count
    ]
    for low, high in violations:
        logger.warning("Nonzero count decreased between u=%g and u=%g", low, high)

    plateau = find_plateau(points, p=X.shape[1])
    if plateau is not None:
        logger.info("Plateau u in [%g, %g] with %d selected features",
                    plateau.u_low, plateau.u_high, len(plateau.support))

    closest = None
    if target_count is not None:
        closest = min(points, key=lambda pt: abs(pt.nonzero_count - target_count))

    return TuningTrajectory(points=points, plateau=plateau,
                            monotonicity_violations=violations,
                            closest_to_target=closest)
