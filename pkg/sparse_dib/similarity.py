"""
Weighted column-stochastic similarity matrices from product RBF kernels.

Column j of a similarity matrix is p(Y = y_i | X = x_j) over the n observed
points. Everything is computed in log-space; feature weights enter as
exponents of the per-feature kernels.
"""

import logging

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.special import logsumexp

from .exceptions import ConstantFeature, DimensionMismatch, NonFiniteData

logger = logging.getLogger(__name__)

DEFAULT_FLOOR = 1e-12


# -------------------------------
# 1. Validation
# -------------------------------
def as_data_matrix(X):
    """Return X as a float (n, p) array, n >= 2, p >= 1, all finite."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"Data must be a 2-D matrix, got {X.ndim} dimension(s)")
    n, p = X.shape
    if n < 2 or p < 1:
        raise DimensionMismatch(f"Data must have n >= 2 rows and p >= 1 columns, got {n}x{p}")
    bad = ~np.isfinite(X)
    if bad.any():
        row, col = (int(i) for i in np.argwhere(bad)[0])
        raise NonFiniteData(f"Non-finite value at row {row}, column {col}", row=row, column=col)
    return X


def as_bandwidths(b, p):
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != p:
        raise DimensionMismatch(f"Expected {p} bandwidths, got {b.shape[0]}")
    if not np.all(np.isfinite(b)) or np.any(b <= 0):
        raise DimensionMismatch("Bandwidths must be finite and strictly positive")
    return b


def _as_weights(w, p):
    w = np.asarray(getattr(w, 'values', w), dtype=float).ravel()
    if w.shape[0] != p:
        raise DimensionMismatch(f"Expected {p} weights, got {w.shape[0]}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DimensionMismatch("Weights must be finite and nonnegative")
    return w


# -------------------------------
# 2. Bandwidths
# -------------------------------
def default_bandwidths(X):
    """Multivariate normal-reference rule, one bandwidth per feature."""
    X = as_data_matrix(X)
    n, p = X.shape
    sigma = X.std(axis=0, ddof=1)
    for m in range(p):
        if not sigma[m] > 0:
            raise ConstantFeature(m)
    factor = (4.0 / (p + 2)) ** (1.0 / (p + 4)) * n ** (-1.0 / (p + 4))
    return sigma * factor


# -------------------------------
# 3. Similarity construction
# -------------------------------
def weighted_log_scores(X, b, w):
    """
    Log of the weighted product kernel between every pair of observations:
    entry (i, j) = -sum_m w_m (y_im - y_jm)^2 / (2 lambda_m^2).
    Features with zero weight are dropped before the distance computation,
    so they contribute exactly nothing.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    b = as_bandwidths(b, p)
    w = _as_weights(w, p)

    active = np.flatnonzero(w > 0)
    if active.size == 0:
        return np.zeros((n, n))

    scaled = X[:, active] * (np.sqrt(w[active]) / b[active])
    sq_dist = squareform(pdist(scaled, metric='sqeuclidean'))
    return -0.5 * sq_dist


def normalize_columns(scores, floor=DEFAULT_FLOOR):
    """Column softmax via log-sum-exp, then a floor of floor/n and renormalisation."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise DimensionMismatch(f"Scores must be square, got shape {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise NonFiniteData("Scores contain non-finite values")

    n = scores.shape[0]
    P = np.exp(scores - logsumexp(scores, axis=0, keepdims=True))
    P = np.maximum(P, floor / n)
    return P / P.sum(axis=0, keepdims=True)


def similarity_matrix(X, b, w, floor=DEFAULT_FLOOR):
    """The weighted similarity matrix used by one Sparse DIB iteration."""
    return normalize_columns(weighted_log_scores(X, b, w), floor)


def per_feature_similarity(X, b, m, floor=DEFAULT_FLOOR):
    """Similarity matrix built from feature m alone (0-based) with weight 1."""
    X = as_data_matrix(X)
    p = X.shape[1]
    if not 0 <= m < p:
        raise DimensionMismatch(f"Feature index {m} outside [0, {p})")
    indicator = np.zeros(p)
    indicator[m] = 1.0
    return similarity_matrix(X, b, indicator, floor)
