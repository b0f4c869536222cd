"""
Discrete information-theoretic primitives.
All quantities are in nats and use the convention 0 * ln 0 = 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import entr, xlogy

from .exceptions import AbsoluteContinuityViolation, AllZeroWeights, DimensionMismatch

MASS_TOL = 1e-10


def _check_mass(values, what):
    if values.size == 0:
        raise DimensionMismatch(f"{what} must have at least one entry")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError(f"{what} entries must be finite and nonnegative")
    total = values.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"{what} sums to {total!r}, expected 1")


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability mass vector, validated at construction."""
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1:
            raise DimensionMismatch("DiscreteDistribution expects a vector")
        _check_mass(probs, "DiscreteDistribution")
        object.__setattr__(self, 'probs', probs)

    def __len__(self):
        return self.probs.shape[0]


@dataclass(frozen=True)
class JointDistribution:
    """Joint mass over (Y, T): rows index Y, columns index T."""
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 2:
            raise DimensionMismatch("JointDistribution expects a matrix")
        _check_mass(mass, "JointDistribution")
        object.__setattr__(self, 'mass', mass)

    @property
    def marginal_y(self):
        return DiscreteDistribution(self.mass.sum(axis=1))

    @property
    def marginal_t(self):
        return DiscreteDistribution(self.mass.sum(axis=0))

    def transpose(self):
        return JointDistribution(self.mass.T)


def entropy(d):
    """Shannon entropy of a DiscreteDistribution."""
    return float(entr(d.probs).sum())


def kl_divergence(p, q):
    """KL(p || q); raises when p puts mass where q has none."""
    if len(p) != len(q):
        raise DimensionMismatch(f"KL inputs differ in length: {len(p)} vs {len(q)}")
    bad = (p.probs > 0) & (q.probs == 0)
    if np.any(bad):
        index = int(np.flatnonzero(bad)[0])
        raise AbsoluteContinuityViolation(
            f"p has mass at index {index} where q has none", index=index
        )
    # xlogy gives 0 where p == 0, whatever q is
    value = float(np.sum(xlogy(p.probs, p.probs) - xlogy(p.probs, q.probs)))
    return max(value, 0.0)


def mutual_information(j):
    """I(Y;T) of a JointDistribution."""
    mass = j.mass
    outer = np.outer(mass.sum(axis=1), mass.sum(axis=0))
    nz = mass > 0
    value = float(np.sum(mass[nz] * (np.log(mass[nz]) - np.log(outer[nz]))))
    return max(value, 0.0)


def normalized_weight_entropy(w):
    """Entropy of w / ||w||_1 divided by ln p; p = 1 gives 0."""
    values = np.asarray(getattr(w, 'values', w), dtype=float)
    total = np.abs(values).sum()
    if total == 0:
        raise AllZeroWeights("Normalized entropy needs at least one nonzero weight")
    if values.shape[0] == 1:
        return 0.0
    h = entropy(DiscreteDistribution(np.abs(values) / total))
    return float(min(max(h / np.log(values.shape[0]), 0.0), 1.0))
