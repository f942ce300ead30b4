"""Per-function bracket construction over a Voronoi partition.

Cells of a fine net are sorted into dyadic slope levels. A level-1 cell gets
the trivial bracket ``(0, 1)``; a level-``m`` cell (``2 <= m <= K``) gets
``(alpha, alpha + 2^(1-m))`` with ``alpha`` on the ``2^-m`` grid; the
remaining cells (level ``K+1``) get ``(alpha, alpha + 2^-K)`` with ``alpha``
on the ``2^-(K+1)`` grid.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SmoothnessError
from .metric import greedy_net, voronoi
from .smoothness import DiscreteMeasure, slope_profile, weak_average_slope


@dataclass(frozen=True)
class BracketParams:
    epsilon: float
    L: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.epsilon < 0.25):
            raise ParameterError(f"epsilon must lie in (0, 1/4), got {self.epsilon}")
        if not self.L > self.epsilon:
            raise ParameterError(f"need L > epsilon, got L={self.L}")
        if not (0.0 < self.beta <= 1.0):
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}")

    @property
    def K(self):
        return math.ceil(math.log2(1.0 / self.epsilon))

    @property
    def eps_prime(self):
        return 1.0 / ((self.K + 1) * 2 ** self.K)

    @property
    def net_radius(self):
        return (self.eps_prime / (32.0 * self.L)) ** (1.0 / self.beta)

    def threshold(self, level):
        """Slope threshold of ``level`` (1..K): L / (2^(level-1) eps')."""
        return self.L / (2 ** (level - 1) * self.eps_prime)


@dataclass(frozen=True)
class Bracket:
    params: BracketParams
    partition: object = field(repr=False)
    lower: np.ndarray
    upper: np.ndarray
    level: np.ndarray

    def pointwise(self, n):
        """Lower and upper envelopes as arrays over all ``n`` points of the space."""
        lo = np.full(n, np.nan)
        hi = np.full(n, np.nan)
        lo[self.partition.points] = self.lower[self.partition.labels]
        hi[self.partition.points] = self.upper[self.partition.labels]
        return lo, hi

    def level_histogram(self):
        return np.bincount(self.level, minlength=self.params.K + 2)[1:]


def _alpha(fmin, step_exp):
    steps = 2 ** step_exp
    return min(math.floor(fmin * steps), steps - 2) / steps


def bracket_for_function(m, mu, f_values, params):
    mu = mu if isinstance(mu, DiscreteMeasure) else DiscreteMeasure(mu)
    f = np.asarray(f_values, dtype=np.float64)
    if f.shape != (m.n,) or len(mu) != m.n:
        raise ParameterError("f_values and mu must cover every point of the space")
    if f.min() < 0.0 or f.max() > 1.0:
        raise ParameterError("f_values must lie in [0, 1]")
    prof = slope_profile(m, f, params.beta).values
    weak = weak_average_slope(prof, mu)
    if weak > params.L:
        raise SmoothnessError(f"weak average slope {weak:.6g} exceeds L={params.L}")

    points = np.arange(m.n)
    net = greedy_net(m, points, params.net_radius)
    part = voronoi(m, points, net)
    K = params.K
    thresholds = np.array([params.threshold(j) for j in range(1, K + 1)])
    lower = np.empty(len(net))
    upper = np.empty(len(net))
    level = np.empty(len(net), dtype=np.int64)
    for c, cell in enumerate(part.cell_positions()):
        pts = part.points[cell]
        smin = prof[pts].min()
        hits = np.flatnonzero(smin >= thresholds)
        lev = int(hits[0]) + 1 if hits.size else K + 1
        level[c] = lev
        if lev == 1:
            lower[c], upper[c] = 0.0, 1.0
        elif lev <= K:
            lower[c] = _alpha(f[pts].min(), lev)
            upper[c] = lower[c] + 2.0 ** (1 - lev)
        else:
            lower[c] = _alpha(f[pts].min(), K + 1)
            upper[c] = lower[c] + 2.0 ** (-K)
    return Bracket(params=params, partition=part, lower=lower, upper=upper, level=level)


@dataclass(frozen=True)
class BracketReport:
    contains: bool
    width: float
    level_mass: np.ndarray
    level_counts: np.ndarray
    net_size: int

    def to_dict(self):
        return {
            "contains": self.contains,
            "width": self.width,
            "level_histogram": self.level_counts.tolist(),
            "level_mass": self.level_mass.tolist(),
            "net_size": self.net_size,
        }


def verify_bracket(b, f_values, mu):
    mu = mu if isinstance(mu, DiscreteMeasure) else DiscreteMeasure(mu)
    f = np.asarray(f_values, dtype=np.float64)
    lo, hi = b.pointwise(len(f))
    contains = bool(np.all((lo <= f) & (f <= hi)))
    width = float(np.dot(mu.weights, hi - lo))
    cell_mass = np.bincount(b.partition.labels, weights=mu.weights[b.partition.points],
                            minlength=len(b.level))
    level_mass = np.bincount(b.level, weights=cell_mass, minlength=b.params.K + 2)[1:]
    return BracketReport(contains=contains, width=width, level_mass=level_mass,
                         level_counts=b.level_histogram(), net_size=len(b.level))


def bracketing_entropy_bound(covering_fn, params):
    """N((eps / (128 L log(1/eps)))^(1/beta)) * log(16 log2(1/eps) / eps)."""
    eps, L, beta = params.epsilon, params.L, params.beta
    if not eps < L:
        raise ParameterError("need epsilon < L")
    scale = (eps / (128.0 * L * math.log(1.0 / eps))) ** (1.0 / beta)
    return covering_fn(scale) * math.log(16.0 * math.log2(1.0 / eps) / eps)


def bracket_count_log(params, net_size):
    """log of the family-size bound (K+1) (8/eps')^|N| for a net of ``net_size`` cells."""
    return math.log(params.K + 1) + net_size * math.log(8.0 / params.eps_prime)
