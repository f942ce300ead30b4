import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from holder_avg import cli, experiments, learner
from holder_avg.smoothness import empirical_average_slope

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

INTERP_TOL = 1e-9
_learn_log = []


def _checked(original):
    def learn(m, S, cfg):
        h = original(m, S, cfg)
        lam = empirical_average_slope(m, S, None, cfg.beta)
        if math.isfinite(lam):
            risk = learner.empirical_risk(h, S)
            bound = h.gamma * (1.0 + 2.0 * lam)
            _learn_log.append((risk, bound))
            assert risk <= bound + INTERP_TOL, (
                f"interpolation bound violated: L_S(h)={risk!r} > {bound!r}")
        return h
    return learn


def _install():
    """Route every entry point to learn() through the checker, before test modules import it."""
    import holder_avg
    wrapped = _checked(learner.learn)
    for mod in (learner, experiments, cli, holder_avg):
        mod.learn = wrapped


_install()


@pytest.fixture
def learn_log():
    start = len(_learn_log)
    yield lambda: _learn_log[start:]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    from holder_avg import kernels
    with kernels.use_backend(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
