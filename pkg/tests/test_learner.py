import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from holder_avg.errors import ParameterError
from holder_avg.learner import (LabeledSample, LearnerConfig, choose_gamma, concentration_bound,
                                empirical_risk, hypothesis_from_dict, learn, sample_size_bound,
                                sample_size_expression, slope_concentration_trial,
                                true_risk_estimate)
from holder_avg.metric import MetricAccessor
from holder_avg.smoothness import (DiscreteMeasure, average_slope, empirical_average_slope,
                                   slope_profile)

import oracles


def test_choose_gamma():
    assert choose_gamma(0.1, 1.0) == pytest.approx(0.1 / 6)
    assert choose_gamma(1.0, 0.0) == 0.5
    assert choose_gamma(0.2, 1.0) >= choose_gamma(0.1, 1.0)
    assert choose_gamma(0.1, 2.0) <= choose_gamma(0.1, 1.0)
    for eps, L in [(0.1, 1.0), (0.5, 3.0), (1e-3, 50.0)]:
        g = choose_gamma(eps, L)
        assert g * (1 + 2 * L) <= eps / 2 * (1 + 1e-15)
    with pytest.raises(ParameterError):
        choose_gamma(0.0, 1.0)
    with pytest.raises(ParameterError):
        choose_gamma(0.1, -1.0)


def test_config_validation():
    with pytest.raises(ParameterError):
        LearnerConfig(beta=1.0)
    with pytest.raises(ParameterError):
        LearnerConfig(beta=1.0, gamma=0.1, epsilon=0.1)
    with pytest.raises(ParameterError):
        LearnerConfig(beta=1.0, gamma=1.0)
    with pytest.raises(ParameterError):
        LearnerConfig(beta=1.5, gamma=0.1)
    with pytest.raises(ParameterError):
        LearnerConfig(beta=1.0, gamma=0.1, L=2.0)
    assert LearnerConfig(beta=1.0, gamma=0.1).mode == "gamma"
    assert LearnerConfig(beta=1.0, epsilon=0.1, L=1.0).mode == "epsilon-L"
    assert LearnerConfig(beta=1.0, epsilon=0.1).mode == "epsilon-estimated-L"


def test_sample_validation():
    with pytest.raises(ParameterError):
        LabeledSample([0, 1], [0.5])
    with pytest.raises(ParameterError):
        LabeledSample([0], [1.5])
    with pytest.raises(ParameterError):
        LabeledSample([0], [0.5], weights=[1.0, 2.0])
    with pytest.warns(UserWarning):
        m = MetricAccessor.from_matrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    S = LabeledSample([0, 1, 2], [0.0, 1.0, 1.0])
    assert S.realizability_conflicts(m).tolist() == [0, 1]
    assert LabeledSample([0, 2], [0.0, 1.0]).realizability_conflicts(m).size == 0


def test_single_point():
    m = MetricAccessor.from_coords([0.0, 0.3, 0.9])
    h = learn(m, LabeledSample([1], [0.7]), LearnerConfig(beta=0.5, gamma=0.1))
    assert h.net_size == 1 and h.discarded.size == 0
    assert h.predict([0, 1, 2]).tolist() == [0.7] * 3


def test_three_point_line():
    m = MetricAccessor.from_coords([0.0, 0.5, 1.0, 0.25])
    h = learn(m, LabeledSample([0, 1, 2], [0.0, 0.5, 1.0]), LearnerConfig(beta=1.0, gamma=0.01))
    assert h.discarded.size == 0 and h.net_size == 3
    assert h(3)[0] == pytest.approx(0.25, abs=1e-12)


def test_planted_outlier_is_discarded():
    rng = np.random.default_rng(5)
    x = np.sort(rng.random(40))
    m = MetricAccessor.from_coords(x)
    y = x.copy()
    y[17] = 1.0 - y[17]
    S = LabeledSample(np.arange(40), y)
    h = learn(m, S, LearnerConfig(beta=1.0, gamma=1.5 / 40))
    slopes = [oracles.slope(oracles.dist_matrix(x[:, None]), y, i, 1.0) for i in range(40)]
    # the flipped point attains the largest slope; a neighbour may tie with it via their pair
    assert slopes[17] == max(slopes)
    assert h.discarded.tolist() == [17]
    kept = np.setdiff1d(np.arange(40), [17])
    np.testing.assert_allclose(h.predict(h.model.base_indices), x[h.model.base_indices])
    assert 17 not in h.base_positions
    assert np.abs(h.predict(kept) - x[kept]).max() < 0.05


def test_all_discarded_is_an_error():
    m = MetricAccessor.from_coords([0.0, 1.0])
    with pytest.raises(ParameterError):
        learn(m, LabeledSample([], []), LearnerConfig(beta=1.0, gamma=0.5))


def test_discard_tie_rule():
    # every point has the same slope; the larger sample positions go first
    m = MetricAccessor.from_coords([0.0, 1.0, 2.0, 3.0])
    S = LabeledSample([0, 1, 2, 3], [0.0, 1.0, 0.0, 1.0])
    h = learn(m, S, LearnerConfig(beta=1.0, gamma=0.5))
    assert h.discarded.tolist() == [2, 3]


def _random_run(rng, n, beta, gamma, d=1):
    X = rng.random((n, d))
    m = MetricAccessor.from_coords(X)
    f = np.clip(X.mean(axis=1) + 0.1 * np.sin(7 * X[:, 0]), 0, 1)
    pts = rng.integers(0, n, size=n)
    S = LabeledSample.from_function(pts, f)
    return m, S, learn(m, S, LearnerConfig(beta=beta, gamma=gamma))


@given(st.integers(1, 80), st.sampled_from([0.3, 0.5, 1.0]), st.floats(0.001, 0.6),
       st.integers(1, 3), st.integers(0, 2**31))
def test_learner_invariants(n, beta, gamma, d, seed):
    rng = np.random.default_rng(seed)
    m, S, h = _random_run(rng, n, beta, gamma, d)
    k = math.floor(gamma * n)
    assert h.discarded.size == k
    D = m.block(np.arange(m.n), np.arange(m.n))
    s = [oracles.slope(D[np.ix_(S.points, S.points)], S.labels, i, beta) for i in range(n)]
    s = np.array(s)
    kept = np.setdiff1d(np.arange(n), h.discarded)
    if k and kept.size:
        assert s[h.discarded].min() >= s[kept].max() - 1e-12
    # labels reproduced exactly on the net; net is a packing at the stated radius
    base = h.base_positions
    assert np.array_equal(h.predict(S.points[base]), S.labels[base])
    assert set(base.tolist()) <= set(kept.tolist())
    Db = D[np.ix_(S.points[base], S.points[base])]
    assert (Db[np.triu_indices(len(base), 1)] >= h.net_radius).all()
    # near-interpolation, also checked by the conftest wrapper
    lam = empirical_average_slope(m, S, None, beta)
    assert empirical_risk(h, S) <= gamma * (1 + 2 * lam) + 1e-9


def test_determinism_and_roundtrip():
    rng = np.random.default_rng(1)
    m, S, h = _random_run(rng, 60, 0.5, 0.05)
    h2 = learn(m, S, LearnerConfig(beta=0.5, gamma=0.05))
    assert json.dumps(h.provenance()) == json.dumps(h2.provenance())
    back = hypothesis_from_dict(m, json.loads(json.dumps(h.provenance())))
    assert np.array_equal(back.predict(np.arange(m.n)), h.predict(np.arange(m.n)))
    with pytest.raises(ParameterError):
        hypothesis_from_dict(m, {"format": "other"})


def test_gamma_modes():
    m = MetricAccessor.from_coords(np.linspace(0, 1, 50))
    S = LabeledSample.from_function(np.arange(50), np.linspace(0, 1, 50))
    h = learn(m, S, LearnerConfig(beta=1.0, epsilon=0.1, L=1.0))
    assert h.gamma == pytest.approx(choose_gamma(0.1, 1.0)) and h.gamma_mode == "epsilon-L"
    h = learn(m, S, LearnerConfig(beta=1.0, epsilon=0.1))
    assert h.l_hat == pytest.approx(1.0)
    assert h.gamma == pytest.approx(choose_gamma(0.1, 1.0))
    assert h.provenance()["l_hat_heuristic"] is True
    bad = LabeledSample([0, 0], [0.0, 1.0])
    with pytest.raises(ParameterError):
        learn(m, bad, LearnerConfig(beta=1.0, epsilon=0.1))


def test_risks():
    m = MetricAccessor.from_coords([0.0, 1.0])
    S = LabeledSample([0, 1, 1, 0], [0.0, 1.0, 1.0, 0.0])
    h = learn(m, S, LearnerConfig(beta=1.0, gamma=0.1))
    assert empirical_risk(h, S) == 0.0
    const = learn(m, LabeledSample([0], [0.0]), LearnerConfig(beta=1.0, gamma=0.1))
    assert empirical_risk(const, S) == 0.5
    r = true_risk_estimate(const, S)
    assert r.value == 0.5 and r.n == 4 and r.stderr == pytest.approx(np.std([0, 1, 1, 0], ddof=1) / 2)
    with pytest.raises(ParameterError):
        empirical_risk(h, LabeledSample([], []))


def test_empirical_risk_bruteforce(rng):
    m, S, h = _random_run(rng, 50, 0.5, 0.2)
    brute = sum(abs(float(h.predict([p])[0]) - y) for p, y in zip(S.points, S.labels)) / S.n
    assert empirical_risk(h, S) == pytest.approx(brute, rel=1e-12)


def test_sample_size_calculator():
    cov = lambda t: math.ceil(1 / t)
    eps, delta, L = 0.1, 0.05, 2.0
    scale = eps / (256 * L * math.log(1 / eps))
    assert sample_size_expression(1.0, eps, delta, cov, L) == pytest.approx(
        (math.ceil(1 / scale) + math.log(1 / delta)) / eps)
    assert sample_size_bound(1.0, eps, delta, cov, L) == math.ceil(
        (math.ceil(1 / scale) + math.log(1 / delta)) / eps)
    diff = (sample_size_expression(1.0, eps, delta / 2, cov, L)
            - sample_size_expression(1.0, eps, delta, cov, L))
    assert diff == pytest.approx(math.log(2) / eps, rel=1e-12)
    # doubling form: N eps^2 / (L log(1/eps)) tends to the constant 256 for d = beta = 1
    ratios = [sample_size_expression(1.0, e, 0.5, cov, L) * e * e / (L * math.log(1 / e))
              for e in (1e-2, 1e-3, 1e-4)]
    assert ratios[-1] == pytest.approx(256, rel=1e-3)
    for bad in [dict(epsilon=2.5), dict(delta=1.0), dict(beta=0.0)]:
        kw = dict(beta=1.0, epsilon=eps, delta=delta, covering_fn=cov, L=L) | bad
        with pytest.raises(ParameterError):
            sample_size_expression(**kw)


def test_concentration_trivial_cases():
    m = MetricAccessor.from_coords(np.linspace(0, 1, 30))
    mu = DiscreteMeasure.uniform(30)
    r = slope_concentration_trial(m, mu, np.full(30, 0.4), 0.5, 20, 0.1, 10)
    assert r.frequency == 0.0 and (r.l_hat == 0).all()
    r = slope_concentration_trial(m, mu, np.linspace(0, 1, 30), 1.0, 1, 0.1, 10)
    assert (r.l_hat == 0).all()
    assert concentration_bound(2.0, 10, 0.1) == pytest.approx(
        4 * math.log(400) ** 2 * 2 + 4 * math.log(400) ** 2 / 10)
    with pytest.raises(ParameterError):
        slope_concentration_trial(m, mu, np.zeros(30), 1.0, 5, 0.1, 0)


def test_output_average_smoothness_statistical():
    """Frequency of avg slope of h under mu exceeding 5 times the sample slope stays small."""
    R = 512
    x = (np.arange(R) + 0.5) / R
    m = MetricAccessor.from_coords(x)
    mu = DiscreteMeasure.uniform(R)
    f = x
    delta, trials, beta, n = 0.1, 40, 0.5, 64
    rng = np.random.default_rng(9)
    bad = 0
    for _ in range(trials):
        S = LabeledSample.from_function(mu.sample(rng, n), f)
        h = learn(m, S, LearnerConfig(beta=beta, gamma=0.05))
        lam = empirical_average_slope(m, S, None, beta)
        avg_h = average_slope(slope_profile(m, h.predict(np.arange(R)), beta), mu)
        bad += avg_h > 5 * lam
    slack = 3 * math.sqrt(delta / 2 * (1 - delta / 2) / trials)
    assert bad / trials <= delta / 2 + slack


def test_every_learn_call_was_checked(learn_log):
    m = MetricAccessor.from_coords(np.linspace(0, 1, 20))
    S = LabeledSample.from_function(np.arange(20), np.linspace(0, 1, 20) ** 2)
    learn(m, S, LearnerConfig(beta=1.0, gamma=0.1))
    log = learn_log()
    assert len(log) == 1 and log[0][0] <= log[0][1] + 1e-9
