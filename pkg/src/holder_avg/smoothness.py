"""Slope functionals and their averages.

Infinite slopes (two points at distance 0 carrying different values) are
represented by ``math.inf``; each aggregate documents how it treats them.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability weights over the points of a finite space."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1:
            raise ParameterError("weights must be one-dimensional")
        if not np.isfinite(w).all() or (w < 0).any():
            raise ParameterError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ParameterError(f"weights must sum to 1, got {w.sum():.12g}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n):
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def from_masses(cls, masses):
        masses = np.asarray(masses, dtype=np.float64)
        return cls(masses / masses.sum())

    @classmethod
    def empirical(cls, points, n):
        """Empirical measure of a sample of point indices on an ``n``-point space."""
        counts = np.bincount(np.asarray(points, dtype=np.int64), minlength=n)
        return cls(counts / counts.sum())

    def __len__(self):
        return len(self.weights)

    @property
    def support(self):
        return np.flatnonzero(self.weights > 0)

    def sample(self, rng, size):
        """Draw ``size`` point indices by inverse-CDF lookup on the weights."""
        cdf = np.cumsum(self.weights)
        u = rng.random(size) * cdf[-1]
        idx = np.searchsorted(cdf, u, side="right")
        return np.minimum(idx, len(self.weights) - 1)


@dataclass(frozen=True)
class SlopeProfile:
    beta: float
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def _check_beta(beta):
    if not (0.0 < beta <= 1.0):
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")


def _ambient(m, f_values):
    f = np.asarray(f_values, dtype=np.float64)
    if f.shape != (m.n,):
        raise ParameterError(f"f_values must have shape ({m.n},), got {f.shape}")
    return f


def beta_slope(m, f_values, i, beta, B=None):
    """sup over y in B\\{i} of |f(i) - f(y)| / d(i, y)^beta (0 for an empty set)."""
    _check_beta(beta)
    f = _ambient(m, f_values)
    B = np.arange(m.n) if B is None else m._check(B)
    i = int(m._check(i))
    return float(kernels.slopes(m, [i], f[[i]], B, f[B], beta)[0])


def slope_profile(m, f_values, beta, B=None, points=None):
    """Slopes at ``points`` (default: every point) against the reference set ``B``."""
    _check_beta(beta)
    f = _ambient(m, f_values)
    B = np.arange(m.n) if B is None else m._check(B)
    points = np.arange(m.n) if points is None else m._check(points)
    return SlopeProfile(beta=float(beta), values=kernels.slopes(m, points, f[points], B, f[B], beta))


def _weights(mu):
    return mu.weights if isinstance(mu, DiscreteMeasure) else DiscreteMeasure(mu).weights


def average_slope(profile, mu):
    values = np.asarray(profile.values if isinstance(profile, SlopeProfile) else profile)
    w = _weights(mu)
    if values.shape != w.shape:
        raise ParameterError("profile and measure cover different point sets")
    live = w > 0
    if np.isinf(values[live]).any():
        return np.inf
    return float(np.dot(w[live], values[live]))


def weak_mean(values, weights):
    """sup_t t * P[Z >= t] for a finitely supported Z, evaluated at its atoms."""
    z = np.asarray(values, dtype=np.float64)
    w = _weights(weights)
    if z.shape != w.shape:
        raise ParameterError("values and weights differ in length")
    if not np.isfinite(z).all():
        raise ParameterError("weak_mean needs finite values")
    if (z < 0).any():
        raise ParameterError("weak_mean needs nonnegative values")
    order = np.argsort(-z, kind="stable")
    zs, tail = z[order], np.cumsum(w[order])
    # tail mass for value t includes every entry equal to t
    last = np.r_[zs[1:] != zs[:-1], True]
    return float(np.max(zs[last] * tail[last], initial=0.0))


def weak_average_slope(profile, mu):
    values = np.asarray(profile.values if isinstance(profile, SlopeProfile) else profile)
    w = _weights(mu)
    live = w > 0
    if np.isinf(values[live]).any():
        return np.inf
    return weak_mean(np.where(live, values, 0.0), w)


def sample_slopes(m, points, values, beta):
    """Slope of each sample entry against the whole sample.

    Repeated (point, value) entries are collapsed first; they only add
    zero-difference pairs, so the result is unchanged.
    """
    pts = np.asarray(points, dtype=np.int64)
    vals = np.asarray(values, dtype=np.float64)
    if pts.size == 0:
        return np.zeros(0)
    keys, inv = np.unique(np.column_stack([pts.astype(np.float64), vals]), axis=0,
                          return_inverse=True)
    up = keys[:, 0].astype(np.int64)
    s = kernels.slopes(m, up, keys[:, 1], up, keys[:, 1], beta)
    return s[inv.reshape(-1)]


def empirical_average_slope(m, sample, f_values, beta):
    """Mean over sample entries of the slope against the other sample points.

    ``f_values`` is a function on the whole space; pass ``None`` to use the
    sample labels (the label-copy function).
    """
    _check_beta(beta)
    pts = np.asarray(sample.points, dtype=np.int64)
    if pts.size == 0:
        raise ParameterError("empty sample")
    vals = sample.labels if f_values is None else _ambient(m, f_values)[pts]
    s = sample_slopes(m, pts, vals, beta)
    if np.isinf(s).any():
        return np.inf
    return float(s.mean())


def harmonic_number(n):
    return float(np.sum(1.0 / np.arange(1, n + 1)))
