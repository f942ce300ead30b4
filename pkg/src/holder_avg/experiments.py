"""Generators and Monte-Carlo harnesses.

The two gap examples live on [0, 1] with ``f(x) = 1[x > 1/2]`` and a power-law
density ``|x - 1/2|^a`` (``a = (beta-1)/2`` for example 1, ``a = beta-1`` for
example 2). They are discretized on ``resolution`` equal cells with nodes at
cell midpoints and exact cell masses, so no node sits at 1/2 when
``resolution`` is even.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._parallel import run_trials
from .errors import ParameterError
from .learner import (LabeledSample, LearnerConfig, choose_gamma, learn,
                      true_risk_estimate)
from .metric import MetricAccessor, Net, diameter, greedy_net, voronoi
from .pmse import pmse_extend_all, pmse_fit
from .smoothness import (DiscreteMeasure, average_slope, slope_profile,
                         weak_average_slope)

GENERATOR_KINDS = ("example1", "example2", "lowerbound", "grid-uniform")


# ---------------------------------------------------------------------------
# power-law densities on [0, 1] centred at 1/2


def _power_antiderivative(x, a):
    t = np.asarray(x, dtype=np.float64) - 0.5
    return np.sign(t) * np.abs(t) ** (a + 1.0) / (a + 1.0)


def power_cell_masses(resolution, a):
    """Exact probability of each of ``resolution`` equal cells under ``|x-1/2|^a``."""
    edges = np.arange(resolution + 1) / resolution
    g = _power_antiderivative(edges, a)
    masses = np.diff(g)
    return masses / (g[-1] - g[0])


def power_inverse_cdf(u, a):
    g0 = _power_antiderivative(0.0, a)
    g1 = _power_antiderivative(1.0, a)
    g = g0 + np.asarray(u, dtype=np.float64) * (g1 - g0)
    t = np.sign(g) * (np.abs(g) * (a + 1.0)) ** (1.0 / (a + 1.0))
    return np.clip(0.5 + t, 0.0, 1.0)


def sample_power_grid(rng, size, resolution, a):
    """Inverse-CDF draws from the continuous density, mapped to their grid cell."""
    x = power_inverse_cdf(rng.random(size), a)
    return np.minimum((x * resolution).astype(np.int64), resolution - 1)


def grid_nodes(resolution):
    return (np.arange(resolution) + 0.5) / resolution


# ---------------------------------------------------------------------------
# generator outputs


@dataclass(frozen=True)
class Oracle:
    """Continuum values of the smoothness functionals; ``None`` when not known in closed form."""

    avg_slope: Optional[float]
    weak_avg_slope: Optional[float]
    weak_avg_lipschitz: Optional[float]


class GeneratedExample(NamedTuple):
    metric: MetricAccessor
    mu: DiscreteMeasure
    f: np.ndarray
    oracle: Oracle
    sample: LabeledSample


def example1_avg_slope(beta):
    """((1+beta)/(1-beta)) 2^beta."""
    return (1.0 + beta) / (1.0 - beta) * 2.0 ** beta


def _check_open_beta(beta):
    if not (0.0 < beta < 1.0):
        raise ParameterError(f"the gap examples need beta in (0, 1), got {beta}")


def _check_resolution(resolution):
    if resolution < 2 or resolution % 2:
        raise ParameterError(f"resolution must be even and >= 2, got {resolution}")


def _gap_example(a, oracle, n, resolution, seed):
    _check_resolution(resolution)
    x = grid_nodes(resolution)
    m = MetricAccessor.from_coords(x)
    mu = DiscreteMeasure.from_masses(power_cell_masses(resolution, a))
    f = (x > 0.5).astype(np.float64)
    pts = sample_power_grid(np.random.default_rng(seed), n, resolution, a)
    return GeneratedExample(m, mu, f, oracle, LabeledSample.from_function(pts, f))


def gen_example1(beta, n, resolution, seed=0):
    """Average-Hölder but not (weakly) average-Lipschitz: density ``|x-1/2|^((beta-1)/2)``."""
    _check_open_beta(beta)
    oracle = Oracle(avg_slope=example1_avg_slope(beta), weak_avg_slope=2.0 ** beta,
                    weak_avg_lipschitz=math.inf)
    return _gap_example((beta - 1.0) / 2.0, oracle, n, resolution, seed)


def gen_example2(beta, n, resolution, seed=0):
    """Weakly but not strongly average-Hölder: density ``|x-1/2|^(beta-1)``."""
    _check_open_beta(beta)
    oracle = Oracle(avg_slope=math.inf, weak_avg_slope=2.0 ** beta, weak_avg_lipschitz=math.inf)
    return _gap_example(beta - 1.0, oracle, n, resolution, seed)


def gen_grid_uniform(n, resolution, d=1, target="identity", seed=0):
    """Uniform measure on a midpoint grid of ``[0,1]^d``; ``f*`` is the coordinate mean."""
    if resolution < 2:
        raise ParameterError("resolution must be >= 2")
    axis = grid_nodes(resolution)
    if d == 1:
        coords = axis[:, None]
    else:
        coords = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    m = MetricAccessor.from_coords(coords)
    if target == "identity":
        f = coords.mean(axis=1)
    elif target == "const":
        f = np.full(m.n, 0.5)
    else:
        raise ParameterError(f"unknown target {target!r}")
    mu = DiscreteMeasure.uniform(m.n)
    pts = mu.sample(np.random.default_rng(seed), n)
    return GeneratedExample(m, mu, f, Oracle(None, None, None), LabeledSample.from_function(pts, f))


def slope_summary(m, mu, f, beta):
    """Discrete average and weak-average slopes for exponent ``beta`` and the Lipschitz weak average."""
    prof = slope_profile(m, f, beta)
    lip = prof if beta == 1.0 else slope_profile(m, f, 1.0)
    return {
        "avg_slope": average_slope(prof, mu),
        "weak_avg_slope": weak_average_slope(prof, mu),
        "weak_avg_lipschitz": weak_average_slope(lip, mu),
    }


def examples_table(which, beta, resolutions):
    """Discrete smoothness functionals of a gap example across grid resolutions."""
    gen = {1: gen_example1, 2: gen_example2}[int(which)]
    rows = []
    for r in resolutions:
        ex = gen(beta, 1, r)
        row = {"resolution": int(r), **slope_summary(ex.metric, ex.mu, ex.f, beta)}
        row.update({f"oracle_{k}": v for k, v in asdict(ex.oracle).items()})
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# generator spec (CLI surface)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    beta: float
    n: int = 256
    d: int = 1
    epsilon: float = 0.1
    L: float = 1.0
    seed: int = 0
    resolution: int = 4096
    target: str = "identity"

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ParameterError(f"kind must be one of {GENERATOR_KINDS}, got {self.kind!r}")
        if self.resolution < 2:
            raise ParameterError("resolution must be >= 2")
        if not (0.0 < self.beta <= 1.0):
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}")

    @classmethod
    def parse(cls, text):
        """Parse ``kind[:key=value,...]``, e.g. ``grid-uniform:beta=0.5,resolution=8192``."""
        kind, _, rest = text.partition(":")
        types = {"beta": float, "n": int, "d": int, "epsilon": float, "L": float,
                 "seed": int, "resolution": int, "target": str}
        kw = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, sep, value = item.partition("=")
            if not sep or key not in types:
                raise ParameterError(f"bad generator option {item!r}")
            kw[key] = types[key](value)
        kw.setdefault("beta", 1.0)
        return cls(kind=kind.strip(), **kw)

    def build(self, n=None, seed=None):
        n = self.n if n is None else n
        seed = self.seed if seed is None else seed
        if self.kind == "example1":
            return gen_example1(self.beta, n, self.resolution, seed)
        if self.kind == "example2":
            return gen_example2(self.beta, n, self.resolution, seed)
        if self.kind == "grid-uniform":
            return gen_grid_uniform(n, self.resolution, self.d, self.target, seed)
        raise ParameterError("lowerbound specs are built with gen_lowerbound")


# ---------------------------------------------------------------------------
# risk sweep


def rate_schedule(beta, L=1.0, d=1):
    """Learner config per n with epsilon_n = L^(d/(d+beta)) n^(-beta/(d+beta))."""
    def config(n):
        eps = L ** (d / (d + beta)) * n ** (-beta / (d + beta))
        return LearnerConfig(beta=beta, epsilon=eps, L=L)
    return config


@dataclass(frozen=True)
class SweepResult:
    rows: list = field(repr=False)
    n_grid: tuple
    mean_risk: tuple
    slope: Optional[float]
    stderr: Optional[float]
    degenerate: bool

    def to_rows(self):
        return list(self.rows)


def fit_loglog(ns, risks):
    """Least-squares slope of log(risk) on log(n) with its standard error."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(risks, dtype=np.float64))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(x) - 2
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = float(np.sqrt(resid @ resid / dof / sxx)) if dof > 0 else math.nan
    return float(coef[0]), stderr


def risk_sweep(gen, n_grid, trials, learner_cfg=None, seed=0, test_factor=10):
    """Train at each n, estimate held-out risk, fit the log-log decay slope.

    ``learner_cfg`` is a ``LearnerConfig`` or a callable ``n -> LearnerConfig``;
    the default follows :func:`rate_schedule` with the generator's ``L`` and ``d``.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 4 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ParameterError("n_grid must be strictly increasing with at least 4 values")
    if learner_cfg is None:
        learner_cfg = rate_schedule(gen.beta, gen.L, gen.d)
    cfg_for = learner_cfg if callable(learner_cfg) else (lambda n: learner_cfg)
    base = gen.build(n=1)
    m, mu, f = base.metric, base.mu, base.f
    n_test = test_factor * max(n_grid)

    rows = []
    for k, n in enumerate(n_grid):
        cfg = cfg_for(n)

        def one(trial, rng, n=n, cfg=cfg):
            train = LabeledSample.from_function(mu.sample(rng, n), f)
            test = LabeledSample.from_function(mu.sample(rng, n_test), f)
            h = learn(m, train, cfg)
            est = true_risk_estimate(h, test)
            uniq, inv = np.unique(train.points, return_inverse=True)
            emp = float(np.mean(np.abs(h.predict(uniq)[inv] - train.labels)))
            return {"n": n, "trial": trial, "empirical_risk": emp, "true_risk": est.value,
                    "true_risk_stderr": est.stderr, "gamma": h.gamma, "net_size": h.net_size}

        rows.extend(run_trials(one, [seed, k], trials))

    rows.sort(key=lambda r: (r["n"], r["trial"]))
    means = tuple(float(np.mean([r["true_risk"] for r in rows if r["n"] == n])) for n in n_grid)
    if min(means) <= 0.0:
        return SweepResult(rows, tuple(n_grid), means, None, None, True)
    slope, stderr = fit_loglog(n_grid, means)
    return SweepResult(rows, tuple(n_grid), means, slope, stderr, False)


# ---------------------------------------------------------------------------
# lower-bound construction


@dataclass(frozen=True)
class LowerBoundGeometry:
    x0: int
    x1: int
    K: np.ndarray
    diam: float
    covering_estimate: int
    packing_radius: float


@dataclass(frozen=True)
class LowerBoundInstance:
    mu: DiscreteMeasure
    f_star: np.ndarray
    K: np.ndarray
    x0: int
    f_bar: np.ndarray
    geometry: LowerBoundGeometry = field(repr=False)


def lowerbound_geometry(m, epsilon, L, beta):
    """Isolated point ``x0`` and a packing ``K`` far from it.

    ``x0, x1`` realise the diameter; the greedy ``(eps/L)^(1/beta)``-net of the
    space (a maximal packing, so its size upper-bounds the covering number) is
    split by the Voronoi cells of ``{x0, x1}``; ``K`` is the net inside the
    heavier cell, truncated to ``floor(|net| / 2)``. ``x0`` is relabelled so it
    always owns the lighter cell.
    """
    if not (0.0 < epsilon < 1.0):
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not (0.0 < beta <= 1.0):
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    allpts = np.arange(m.n)
    D = diameter(m, allpts)
    if D <= 0:
        raise ParameterError("space has zero diameter")
    if L < 8.0 / D * (1 - 1e-12):
        raise ParameterError(f"need L >= 8/diam = {8.0 / D:.6g}, got {L}")
    far = _diameter_pair(m, D)
    t = (epsilon / L) ** (1.0 / beta)
    net = greedy_net(m, allpts, t)
    split = voronoi(m, net.centers, Net(np.array(far), math.inf))
    size = np.bincount(split.labels, minlength=2)
    heavy = 1 if size[1] >= size[0] else 0
    x0, x1 = far[1 - heavy], far[heavy]
    k_size = len(net) // 2
    K = net.centers[split.labels == heavy][:k_size]
    if K.size == 0:
        raise ParameterError("packing set K is empty; decrease epsilon or increase L")
    return LowerBoundGeometry(x0=int(x0), x1=int(x1), K=K, diam=D,
                              covering_estimate=len(net), packing_radius=t)


def _diameter_pair(m, D):
    step = max(1, (1 << 22) // max(1, m.n))
    for start in range(0, m.n, step):
        rows = np.arange(start, min(m.n, start + step))
        blk = m.block(rows, np.arange(m.n))
        hit = np.argwhere(blk == D)
        if hit.size:
            return int(rows[hit[0, 0]]), int(hit[0, 1])
    raise RuntimeError("diameter pair not found")  # pragma: no cover


def lowerbound_instance(m, geometry, epsilon, beta, rng):
    K = geometry.K
    w = np.zeros(m.n)
    w[geometry.x0] = 1.0 - epsilon / 2.0
    w[K] = epsilon / (2.0 * len(K))
    mu = DiscreteMeasure(w)
    base = np.r_[geometry.x0, K]
    f_bar = np.r_[0.0, rng.integers(0, 2, size=len(K)).astype(np.float64)]
    f_star = pmse_extend_all(pmse_fit(m, base, f_bar, beta), np.arange(m.n))
    return LowerBoundInstance(mu=mu, f_star=f_star, K=K, x0=geometry.x0, f_bar=f_bar,
                              geometry=geometry)


def gen_lowerbound(m, epsilon, L, beta, seed=0):
    """Adversarial distribution: heavy atom ``x0`` plus random 0/1 labels on a packing."""
    geo = lowerbound_geometry(m, epsilon, L, beta)
    return lowerbound_instance(m, geo, epsilon, beta, np.random.default_rng(seed))


@dataclass(frozen=True)
class LowerBoundResult:
    mean_risk: float
    stderr: float
    risks: np.ndarray = field(repr=False)
    k_size: int = 0
    n: int = 0
    gamma: Optional[float] = None


def weighted_median(values, weights):
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    return float(values[order][np.searchsorted(cum, 0.5 * cum[-1])])


def lowerbound_trial(m, epsilon, L, beta, n, trials, seed=0, gamma=None):
    """Mean exact risk of the learner against freshly labelled adversarial targets.

    ``n = 0`` scores the best constant predictor (the mu-weighted median of f*).
    """
    geo = lowerbound_geometry(m, epsilon, L, beta)
    gamma = choose_gamma(epsilon, L) if gamma is None else gamma
    cfg = LearnerConfig(beta=beta, gamma=gamma)
    support = np.r_[geo.x0, geo.K]

    def one(_, rng):
        inst = lowerbound_instance(m, geo, epsilon, beta, rng)
        w = inst.mu.weights[support]
        truth = inst.f_star[support]
        if n == 0:
            pred = np.full(support.shape, weighted_median(truth, w))
        else:
            pts = inst.mu.sample(rng, n)
            h = learn(m, LabeledSample.from_function(pts, inst.f_star), cfg)
            pred = h.predict(support)
        return float(np.dot(w, np.abs(pred - truth)))

    risks = np.asarray(run_trials(one, seed, trials))
    stderr = float(risks.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    return LowerBoundResult(mean_risk=float(risks.mean()), stderr=stderr, risks=risks,
                            k_size=len(geo.K), n=n, gamma=None if n == 0 else gamma)
