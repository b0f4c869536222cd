"""
Synthetic Gaussian-mixture benchmark data: the first rho = floor(p * q_ratio)
columns follow a K-component mixture, the rest are iid standard normal noise.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .exceptions import InfeasibleSpec

logger = logging.getLogger(__name__)

MAX_REJECTIONS = 1000
MIN_COMPONENT_SIZE = 2
ELLIPTICAL_VARIANCE_RANGE = (0.5, 1.5)
# the "high separation" regime used by the benchmark defaults
HIGH_SEPARATION = 6.0


@dataclass(frozen=True)
class MixtureSpec:
    n: int = 200
    p: int = 100
    q_ratio: float = 0.05
    k: int = 3
    balance: str = 'balanced'
    shape: str = 'spherical'
    separation: float = 3.0
    seed: int = 0
    shuffle_columns: bool = False

    def __post_init__(self):
        if not 0 < self.q_ratio <= 1:
            raise InfeasibleSpec("q_ratio must lie in (0, 1]", q_ratio=self.q_ratio)
        if self.balance not in ('balanced', 'unbalanced'):
            raise InfeasibleSpec(f"Unknown balance {self.balance!r}")
        if self.shape not in ('spherical', 'elliptical'):
            raise InfeasibleSpec(f"Unknown shape {self.shape!r}")
        if not self.separation > 0:
            raise InfeasibleSpec("separation must be positive")
        if self.k < 1 or self.k > self.n:
            raise InfeasibleSpec(f"Need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.rho < 1:
            raise InfeasibleSpec(f"floor(p * q_ratio) = {self.rho}; at least one informative feature required")

    @property
    def rho(self):
        # guard against products such as 0.1 * 30 landing just below an integer
        return int(np.floor(self.p * self.q_ratio + 1e-9))

    def to_dict(self):
        return asdict(self)


@dataclass
class LabeledDataset:
    data: np.ndarray
    labels: np.ndarray
    informative: tuple
    spec: MixtureSpec
    proportions: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    column_order: Optional[np.ndarray] = None

    def metadata(self):
        """Sidecar description: full spec, ground truth and generator draws."""
        return {
            'spec': self.spec.to_dict(),
            'rho': self.spec.rho,
            'informative': [int(i) for i in self.informative],
            'labels': [int(label) for label in self.labels],
            'proportions': self.proportions.tolist(),
            'means': self.means.tolist(),
            'variances': self.variances.tolist(),
            'column_order': None if self.column_order is None else self.column_order.tolist(),
        }


def mixing_proportions(k, balance):
    if balance == 'balanced':
        return np.full(k, 1.0 / k)
    weights = np.arange(1, k + 1, dtype=float)
    return weights / weights.sum()


def _draw_means(rng, k, rho, separation):
    for _ in range(MAX_REJECTIONS):
        means = rng.uniform(-separation, separation, size=(k, rho))
        if k == 1 or pdist(means).min() >= separation:
            return means
    raise InfeasibleSpec(
        f"Could not place {k} means {separation} apart in {rho} dimension(s) "
        f"after {MAX_REJECTIONS} draws", k=k, rho=rho, separation=separation)


def _draw_labels(rng, n, proportions):
    k = proportions.shape[0]
    for _ in range(MAX_REJECTIONS):
        labels = rng.choice(k, size=n, p=proportions)
        if np.bincount(labels, minlength=k).min() >= MIN_COMPONENT_SIZE:
            return labels
    raise InfeasibleSpec(
        f"Could not give every component {MIN_COMPONENT_SIZE} points after {MAX_REJECTIONS} draws",
        n=n, k=k)


def generate(spec):
    """Draw one dataset; a fixed seed gives a bit-identical result."""
    rng = np.random.default_rng(spec.seed)
    rho = spec.rho
    proportions = mixing_proportions(spec.k, spec.balance)
    means = _draw_means(rng, spec.k, rho, spec.separation)
    if spec.shape == 'spherical':
        variances = np.ones((spec.k, rho))
    else:
        variances = rng.uniform(*ELLIPTICAL_VARIANCE_RANGE, size=(spec.k, rho))
    labels = _draw_labels(rng, spec.n, proportions)

    informative = means[labels] + np.sqrt(variances[labels]) * rng.standard_normal((spec.n, rho))
    noise = rng.standard_normal((spec.n, spec.p - rho))
    data = np.hstack([informative, noise])

    column_order = None
    informative_idx = tuple(range(rho))
    if spec.shuffle_columns:
        column_order = rng.permutation(spec.p)
        data = data[:, column_order]
        informative_idx = tuple(sorted(int(i) for i in np.flatnonzero(column_order < rho)))

    if np.any(data.std(axis=0) == 0):
        raise InfeasibleSpec("Generated a constant column")

    logger.debug("Generated %dx%d dataset with %d informative features (seed %d)",
                 spec.n, spec.p, rho, spec.seed)
    return LabeledDataset(
        data=data,
        labels=labels,
        informative=informative_idx,
        spec=spec,
        proportions=proportions,
        means=means,
        variances=variances,
        column_order=column_order,
    )
