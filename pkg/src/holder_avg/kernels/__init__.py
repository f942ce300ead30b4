"""Kernel dispatch.

The public functions here take a :class:`~holder_avg.metric.MetricAccessor`
and route to the numba or numpy implementation chosen by
``HOLDER_AVG_BACKEND`` at import time. ``use_backend`` switches at runtime,
which the parity tests and the benchmark rely on.
"""
from contextlib import contextmanager

import numpy as np

from .._backend import requested_backend
from . import _numpy

# PMSE maximizer ties within this relative tolerance count as exact ties.
PMSE_RTOL = 1e-12
PMSE_MAX_ITER = 200

_state = {"name": requested_backend()}


def _numba_mod():
    from . import _numba
    return _numba


def backend():
    return _state["name"]


def set_backend(name):
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba":
        _numba_mod()
    _state["name"] = name


@contextmanager
def use_backend(name):
    old = _state["name"]
    set_backend(name)
    try:
        yield
    finally:
        _state["name"] = old


def _as_idx(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _as_val(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def slopes(m, q_idx, q_val, r_idx, r_val, beta):
    """Per-query sup of ``|q_val - r_val| / d^beta`` over the reference entries.

    Zero-difference pairs are skipped; a positive difference at distance 0
    yields ``inf``. Empty reference sets give 0.
    """
    q_idx, r_idx = _as_idx(q_idx), _as_idx(r_idx)
    q_val, r_val = _as_val(q_val), _as_val(r_val)
    if _state["name"] == "numba":
        return _numba_mod().slopes(*m.kernel_args(), q_idx, q_val, r_idx, r_val, float(beta))
    return _numpy.slopes(m, q_idx, q_val, r_idx, r_val, float(beta))


def pmse_values(m, base_idx, base_val, targets, beta):
    base_idx, targets = _as_idx(base_idx), _as_idx(targets)
    base_val = _as_val(base_val)
    if _state["name"] == "numba":
        return _numba_mod().pmse_values(*m.kernel_args(), base_idx, base_val, targets,
                                        float(beta), PMSE_RTOL, PMSE_MAX_ITER)
    return _numpy.pmse_values(m, base_idx, base_val, targets, float(beta),
                              PMSE_RTOL, PMSE_MAX_ITER)


def greedy_net_positions(m, subset, t):
    subset = _as_idx(subset)
    if _state["name"] == "numba":
        return _numba_mod().greedy_net(*m.kernel_args(), subset, float(t))
    return _numpy.greedy_net(m, subset, float(t))


def nearest_center(m, points, centers):
    points, centers = _as_idx(points), _as_idx(centers)
    if _state["name"] == "numba":
        return _numba_mod().nearest_center(*m.kernel_args(), points, centers)
    return _numpy.nearest_center(m, points, centers)


def max_pairwise(m, subset):
    subset = _as_idx(subset)
    if _state["name"] == "numba":
        return float(_numba_mod().max_pairwise(*m.kernel_args(), subset))
    return _numpy.max_pairwise(m, subset)
