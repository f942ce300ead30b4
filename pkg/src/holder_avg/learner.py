"""Realizable learner: copy labels, drop high-slope outliers, net, extend.

Given a sample ``(X_i, Y_i)`` the learner

1. takes the label-copy function ``f_hat(X_i) = Y_i``;
2. discards the ``floor(gamma * n)`` entries with the largest slope of
   ``f_hat`` against the whole sample (ties: larger sample position first);
3. builds a greedy ``gamma^(1/beta)``-net of the kept points;
4. returns the PMSE extension of ``f_hat`` from the net.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._parallel import run_trials
from .errors import ConsistencyError, ParameterError
from .metric import greedy_net_positions
from .pmse import PmseModel, pmse_extend_all, pmse_fit
from .smoothness import DiscreteMeasure, average_slope, sample_slopes, slope_profile

MODEL_FORMAT = "holder-avg/model/v1"


@dataclass(frozen=True)
class LabeledSample:
    points: np.ndarray
    labels: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.int64).reshape(-1)
        lab = np.array(self.labels, dtype=np.float64).reshape(-1)
        if pts.shape != lab.shape:
            raise ParameterError("points and labels differ in length")
        if lab.size and (not np.isfinite(lab).all() or lab.min() < 0.0 or lab.max() > 1.0):
            raise ParameterError("labels must lie in [0, 1]")
        pts.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)
        if self.weights is not None:
            w = np.array(self.weights, dtype=np.float64).reshape(-1)
            if w.shape != pts.shape:
                raise ParameterError("weights and points differ in length")
            object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.points.shape[0]

    def __len__(self):
        return self.n

    @classmethod
    def from_function(cls, points, f_values):
        points = np.asarray(points, dtype=np.int64)
        return cls(points, np.asarray(f_values, dtype=np.float64)[points])

    def realizability_conflicts(self, m):
        """Sample positions whose point has another entry at distance 0 with a different label."""
        return np.flatnonzero(np.isinf(sample_slopes(m, self.points, self.labels, 1.0)))


def choose_gamma(epsilon, L):
    """gamma = epsilon / (2 (1 + 2L)), clamped to (0, 1/2]."""
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if not L >= 0:
        raise ParameterError(f"L must be nonnegative, got {L}")
    gamma = epsilon / (2.0 * (1.0 + 2.0 * L))
    if not gamma > 0:
        raise ParameterError(f"gamma underflows for epsilon={epsilon}, L={L}")
    return min(gamma, 0.5)


@dataclass(frozen=True)
class LearnerConfig:
    """Exactly one of ``gamma`` or ``epsilon`` must be set.

    With ``epsilon`` and no ``L``, the smoothness budget is estimated by the
    empirical average slope of the labels. That mode is a heuristic and is
    marked as such in the hypothesis provenance.
    """

    beta: float
    gamma: Optional[float] = None
    epsilon: Optional[float] = None
    L: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}")
        if (self.gamma is None) == (self.epsilon is None):
            raise ParameterError("set exactly one of gamma or epsilon")
        if self.gamma is not None and not (0.0 < self.gamma < 1.0):
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.gamma is not None and self.L is not None:
            raise ParameterError("L is only used together with epsilon")

    @property
    def mode(self):
        if self.gamma is not None:
            return "gamma"
        return "epsilon-L" if self.L is not None else "epsilon-estimated-L"

    def resolve_gamma(self, l_hat):
        if self.gamma is not None:
            return self.gamma
        L = self.L if self.L is not None else l_hat
        if not np.isfinite(L):
            raise ParameterError("cannot estimate L: empirical slope is infinite")
        return choose_gamma(self.epsilon, L)


@dataclass(frozen=True)
class Hypothesis:
    model: PmseModel
    beta: float
    gamma: float
    net_radius: float
    n: int
    l_hat: float
    discarded: np.ndarray = field(repr=False)
    base_positions: np.ndarray = field(repr=False)
    gamma_mode: str = "gamma"
    seed: int = 0

    @property
    def net_size(self):
        return len(self.model.base_indices)

    def predict(self, targets):
        return pmse_extend_all(self.model, targets)

    __call__ = predict

    def provenance(self):
        return {
            "format": MODEL_FORMAT,
            "beta": self.beta,
            "gamma": self.gamma,
            "gamma_mode": self.gamma_mode,
            "l_hat_heuristic": self.gamma_mode == "epsilon-estimated-L",
            "net_radius": self.net_radius,
            "net_size": self.net_size,
            "n": self.n,
            "l_hat": self.l_hat if np.isfinite(self.l_hat) else None,
            "seed": self.seed,
            "base_indices": self.model.base_indices.tolist(),
            "base_values": self.model.base_values.tolist(),
            "base_positions": self.base_positions.tolist(),
            "discarded": self.discarded.tolist(),
        }


def learn(m, S, cfg):
    n = S.n
    if n < 1:
        raise ParameterError("learn needs at least one sample")
    beta = cfg.beta
    slopes = sample_slopes(m, S.points, S.labels, beta)
    l_hat = float(slopes.mean()) if np.isfinite(slopes).all() else math.inf
    gamma = cfg.resolve_gamma(l_hat)
    if not (0.0 < gamma < 1.0):
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
    k = math.floor(gamma * n)
    if k >= n:
        raise ConsistencyError("every sample point would be discarded")
    pos = np.arange(n)
    # largest slope first; among equal slopes the larger position goes first
    order = np.lexsort((-pos, -slopes))
    discarded = np.sort(order[:k])
    kept = np.sort(order[k:])
    radius = gamma ** (1.0 / beta)
    centers = kept[greedy_net_positions(m, S.points[kept], radius)]
    model = pmse_fit(m, S.points[centers], S.labels[centers], beta)
    return Hypothesis(model=model, beta=beta, gamma=gamma, net_radius=radius, n=n,
                      l_hat=l_hat, discarded=discarded, base_positions=centers,
                      gamma_mode=cfg.mode, seed=cfg.seed)


def hypothesis_from_dict(m, d):
    if d.get("format") != MODEL_FORMAT:
        raise ParameterError(f"unsupported model format {d.get('format')!r}")
    model = pmse_fit(m, d["base_indices"], d["base_values"], d["beta"])
    l_hat = d.get("l_hat")
    return Hypothesis(model=model, beta=d["beta"], gamma=d["gamma"], net_radius=d["net_radius"],
                      n=d["n"], l_hat=math.inf if l_hat is None else l_hat,
                      discarded=np.asarray(d["discarded"], dtype=np.int64),
                      base_positions=np.asarray(d["base_positions"], dtype=np.int64),
                      gamma_mode=d.get("gamma_mode", "gamma"), seed=d.get("seed", 0))


def empirical_risk(h, S):
    """Mean absolute deviation of ``h`` from the labels of ``S``."""
    if S.n == 0:
        raise ParameterError("empty sample")
    uniq, inv = np.unique(S.points, return_inverse=True)
    pred = h.predict(uniq)[inv]
    return float(np.mean(np.abs(pred - S.labels)))


class RiskEstimate(NamedTuple):
    value: float
    n: int
    stderr: float


def true_risk_estimate(h, test):
    """Held-out estimate of the L1 risk with its Monte-Carlo standard error."""
    uniq, inv = np.unique(test.points, return_inverse=True)
    err = np.abs(h.predict(uniq)[inv] - test.labels)
    stderr = float(err.std(ddof=1) / math.sqrt(test.n)) if test.n > 1 else math.nan
    return RiskEstimate(float(err.mean()), test.n, stderr)


def sample_size_expression(beta, epsilon, delta, covering_fn, L):
    """Sample-size expression with its O(.) constant set to 1, before rounding."""
    if not (0.0 < beta <= 1.0):
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    if not (0.0 < epsilon < L):
        raise ParameterError(f"need 0 < epsilon < L, got epsilon={epsilon}, L={L}")
    if not epsilon < 1.0:
        raise ParameterError("epsilon must be below 1 for log(1/epsilon) > 0")
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    scale = (epsilon / (256.0 * L * math.log(1.0 / epsilon))) ** (1.0 / beta)
    return (covering_fn(scale) + math.log(1.0 / delta)) / epsilon


def sample_size_bound(beta, epsilon, delta, covering_fn, L):
    """Order-of-magnitude sample size for uniform convergence (not a guarantee)."""
    return int(math.ceil(sample_size_expression(beta, epsilon, delta, covering_fn, L)))


def concentration_bound(avg_slope, n, delta):
    """4 log^2(4n/delta) * avg_slope + 4 log^2(4n/delta) / n."""
    c = 4.0 * math.log(4.0 * n / delta) ** 2
    return c * avg_slope + c / n


@dataclass(frozen=True)
class ConcentrationResult:
    frequency: float
    exceedances: int
    trials: int
    bound: float
    avg_slope: float
    l_hat: np.ndarray = field(repr=False)


def slope_concentration_trial(m, mu, f_star, beta, n, delta, trials, seed=0):
    """Fraction of size-``n`` samples whose empirical slope exceeds the concentration bound."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not isinstance(mu, DiscreteMeasure):
        mu = DiscreteMeasure(mu)
    f = np.asarray(f_star, dtype=np.float64)
    avg = average_slope(slope_profile(m, f, beta), mu)
    bound = concentration_bound(avg, n, delta)

    def one(_, rng):
        pts = mu.sample(rng, n)
        vals = f[pts]
        s = sample_slopes(m, pts, vals, beta)
        return float(s.mean()) if np.isfinite(s).all() else math.inf

    lh = np.asarray(run_trials(one, seed, trials))
    exceed = int(np.sum(lh > bound))
    return ConcentrationResult(frequency=exceed / trials, exceedances=exceed, trials=trials,
                               bound=bound, avg_slope=avg, l_hat=lh)
