import math

import numpy as np
import pytest

from holder_avg.bracketing import (BracketParams, bracket_count_log, bracket_for_function,
                                   bracketing_entropy_bound, verify_bracket)
from holder_avg.errors import ParameterError, SmoothnessError
from holder_avg.metric import MetricAccessor
from holder_avg.pmse import pmse_extend_all, pmse_fit
from holder_avg.smoothness import DiscreteMeasure, slope_profile, weak_average_slope


def smooth_function(m, mu, rng, beta, L, seeds=6):
    """PMSE extension of random sparse seeds, shrunk toward 1/2 until the weak slope is <= L."""
    A = rng.choice(m.n, size=min(seeds, m.n), replace=False)
    f = pmse_extend_all(pmse_fit(m, A, rng.random(len(A)), beta), np.arange(m.n))
    w = weak_average_slope(slope_profile(m, f, beta), mu)
    c = min(1.0, 0.999 * L / w) if w > 0 else 1.0
    return 0.5 + c * (f - 0.5)


def clustered_space(rng, clusters=30, per=8, spread=1e-7):
    centers = rng.random((clusters, 2))
    pts = centers[:, None, :] + spread * rng.standard_normal((clusters, per, 2))
    return MetricAccessor.from_coords(pts.reshape(-1, 2))


def check_bracket(m, mu, f, params):
    b = bracket_for_function(m, mu, f, params)
    rep = verify_bracket(b, f, mu)
    K, ep = params.K, params.eps_prime
    assert rep.contains
    assert rep.width <= params.epsilon
    for lev in range(1, K + 1):
        assert rep.level_mass[lev - 1] <= 2 ** (lev - 1) * ep * (1 + 1e-12)
    for c, cell in enumerate(b.partition.cell_positions()):
        vals = f[b.partition.points[cell]]
        lev, lo, hi = b.level[c], b.lower[c], b.upper[c]
        if lev == 1:
            assert (lo, hi) == (0.0, 1.0)
            continue
        step = 2.0 ** -(lev if lev <= K else K + 1)
        assert lo / step == math.floor(lo / step)
        assert hi - lo == (2.0 ** (1 - lev) if lev <= K else 2.0 ** -K)
        bound = 1 / (4 * 2 ** (lev - 1)) if lev <= K else 1 / (8 * 2 ** K)
        assert vals.max() - vals.min() <= bound + 1e-12
    return b, rep


@pytest.mark.parametrize("eps, L", [(0.1, 1.0), (0.05, 2.0)])
@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_bracket_on_grid(eps, L, beta, rng):
    n = 512
    m = MetricAccessor.from_coords((np.arange(n) + 0.5) / n)
    mu = DiscreteMeasure.from_masses(rng.random(n) + 0.1)
    for _ in range(3):
        check_bracket(m, mu, smooth_function(m, mu, rng, beta, L), BracketParams(eps, L, beta))


@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_bracket_on_clusters(beta, rng):
    m = clustered_space(rng)
    mu = DiscreteMeasure.uniform(m.n)
    params = BracketParams(0.1, 1.0, beta)
    seen = set()
    for _ in range(5):
        b, rep = check_bracket(m, mu, smooth_function(m, mu, rng, beta, 1.0), params)
        seen.update(np.flatnonzero(rep.level_counts).tolist())
    assert len(b.level) < m.n  # cells really hold several points


def test_high_slope_levels_are_used():
    # a step puts a little mass on very high slopes
    n = 1024
    x = (np.arange(n) + 0.5) / n
    m = MetricAccessor.from_coords(x)
    mu = DiscreteMeasure.uniform(n)
    f = (x > 0.5).astype(float)
    L = weak_average_slope(slope_profile(m, f, 1.0), mu)
    params = BracketParams(0.1, L, 1.0)
    b, rep = check_bracket(m, mu, f, params)
    assert rep.level_counts[:-1].sum() > 0


def test_constant_function_all_top_level():
    m = MetricAccessor.from_coords(np.linspace(0, 1, 64))
    mu = DiscreteMeasure.uniform(64)
    params = BracketParams(0.1, 1.0, 1.0)
    rep = verify_bracket(bracket_for_function(m, mu, np.full(64, 0.3), params), np.full(64, 0.3), mu)
    assert rep.level_counts.tolist() == [0] * params.K + [rep.net_size]
    assert rep.width == pytest.approx(2.0 ** -params.K)
    d = rep.to_dict()
    assert set(d) == {"contains", "width", "level_histogram", "level_mass", "net_size"}


def test_perturbation_breaks_containment():
    m = MetricAccessor.from_coords(np.linspace(0, 1, 64))
    mu = DiscreteMeasure.uniform(64)
    f = np.full(64, 0.3)
    b = bracket_for_function(m, mu, f, BracketParams(0.1, 1.0, 1.0))
    g = f.copy()
    g[10] = b.pointwise(64)[1][10] + 0.01
    assert not verify_bracket(b, g, mu).contains


def test_errors():
    m = MetricAccessor.from_coords(np.linspace(0, 1, 16))
    mu = DiscreteMeasure.uniform(16)
    with pytest.raises(ParameterError):
        BracketParams(0.25, 1.0, 1.0)
    with pytest.raises(ParameterError):
        BracketParams(0.1, 0.05, 1.0)
    with pytest.raises(ParameterError):
        BracketParams(0.1, 1.0, 0.0)
    with pytest.raises(SmoothnessError):
        bracket_for_function(m, mu, np.r_[np.zeros(8), np.ones(8)], BracketParams(0.1, 1.0, 1.0))
    with pytest.raises(ParameterError):
        bracket_for_function(m, mu, np.full(16, 2.0), BracketParams(0.1, 1.0, 1.0))
    with pytest.raises(ParameterError):
        bracket_for_function(m, mu, np.zeros(3), BracketParams(0.1, 1.0, 1.0))


def test_params_arithmetic():
    p = BracketParams(0.1, 2.0, 0.5)
    assert p.K == 4
    assert p.eps_prime == 1 / (5 * 16)
    assert p.net_radius == pytest.approx((p.eps_prime / 64) ** 2)
    assert p.threshold(1) == pytest.approx(2.0 / p.eps_prime)
    assert p.threshold(3) == pytest.approx(2.0 / (4 * p.eps_prime))


def test_entropy_bound_single_point():
    for eps in (0.01, 0.1, 0.2):
        p = BracketParams(eps, 1.0, 1.0)
        assert bracketing_entropy_bound(lambda t: 1, p) == pytest.approx(
            math.log(16 * math.log2(1 / eps) / eps))


def test_entropy_bound_monotone_in_eps():
    cov = lambda t: math.ceil(1 / t)
    vals = [bracketing_entropy_bound(cov, BracketParams(e, 3.0, 0.7))
            for e in np.linspace(0.01, 0.24, 30)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05, 0.01, 1e-3])
@pytest.mark.parametrize("net", [1, 5, 50])
def test_count_form_within_corrected_bound(eps, net):
    """(K+1)(8/eps')^|N| stays within the entropy form once its log factor carries a +2."""
    p = BracketParams(eps, 1.0, 1.0)
    corrected = math.log(p.K + 1) + net * math.log(16 * (math.log2(1 / eps) + 2) / eps)
    assert bracket_count_log(p, net) <= corrected


def test_count_form_exceeds_stated_bound_at_small_net():
    # documented constant slip: with |N| = 1 and eps = 0.1 the count form is larger
    p = BracketParams(0.1, 1.0, 1.0)
    assert bracket_count_log(p, 1) > bracketing_entropy_bound(lambda t: 1, p)
