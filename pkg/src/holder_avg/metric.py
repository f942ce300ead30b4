"""Finite metric spaces: distance oracles, snowflake distances, nets, Voronoi cells."""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import kernels
from .errors import ConsistencyError, ParameterError

EXHAUSTIVE_TRIANGLE_MAX_N = 512
SAMPLED_TRIANGLES = 100_000


class MetricAccessor:
    """Distance oracle over points ``0..n-1``.

    Backed either by an explicit ``n x n`` matrix or by coordinates with a
    p-norm (``p=2`` by default, ``p=np.inf`` for Chebyshev). Arrays are
    copied and frozen on construction.
    """

    def __init__(self, *, matrix=None, coords=None, p=2.0, validate=True, seed=0):
        if (matrix is None) == (coords is None):
            raise ParameterError("give exactly one of matrix= or coords=")
        self.p = float(p)
        if self.p < 1.0:
            raise ParameterError(f"p-norm requires p >= 1, got {p}")
        if matrix is not None:
            D = np.array(matrix, dtype=np.float64)
            if D.ndim != 2 or D.shape[0] != D.shape[1]:
                raise ParameterError(f"distance matrix must be square, got shape {D.shape}")
            D.setflags(write=False)
            self._D = D
            self._X = None
            self.mode = "matrix"
            self.n = D.shape[0]
            if validate:
                _validate_matrix(D, seed)
        else:
            X = np.array(coords, dtype=np.float64)
            if X.ndim == 1:
                X = X[:, None]
            if X.ndim != 2:
                raise ParameterError(f"coordinates must be 2-D, got shape {X.shape}")
            if not np.isfinite(X).all():
                raise ParameterError("coordinates must be finite")
            X.setflags(write=False)
            self._D = None
            self._X = X
            self.mode = "euclidean"
            self.n = X.shape[0]
        self._dummy = np.zeros((1, 1))

    @classmethod
    def from_matrix(cls, matrix, validate=True, seed=0):
        return cls(matrix=matrix, validate=validate, seed=seed)

    @classmethod
    def from_coords(cls, coords, p=2.0):
        return cls(coords=coords, p=p)

    @property
    def coords(self):
        return self._X

    @property
    def matrix(self):
        return self._D

    @property
    def dim(self):
        return None if self._X is None else self._X.shape[1]

    def __len__(self):
        return self.n

    def __repr__(self):
        extra = f", d={self.dim}, p={self.p:g}" if self._X is not None else ""
        return f"MetricAccessor(mode={self.mode!r}, n={self.n}{extra})"

    def _check(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise ParameterError(f"point index out of range [0, {self.n})")
        return idx

    def dist(self, i, j):
        i, j = int(self._check(i)), int(self._check(j))
        if self._D is not None:
            return float(self._D[i, j])
        return float(self.block([i], [j])[0, 0])

    def block(self, rows, cols):
        """Distances between ``rows`` and ``cols`` as a dense array."""
        rows = np.atleast_1d(np.asarray(rows, dtype=np.int64))
        cols = np.atleast_1d(np.asarray(cols, dtype=np.int64))
        if self._D is not None:
            return self._D[np.ix_(rows, cols)]
        A, B = self._X[rows], self._X[cols]
        if self.p == 2.0:
            if A.shape[1] == 1:
                return np.abs(A[:, 0][:, None] - B[:, 0][None, :])
            return cdist(A, B, "euclidean")
        if self.p == 1.0:
            return cdist(A, B, "cityblock")
        if np.isinf(self.p):
            return cdist(A, B, "chebyshev")
        return cdist(A, B, "minkowski", p=self.p)

    def kernel_args(self):
        if self._D is not None:
            return 0, self._D, self._dummy, self.p
        return 1, self._dummy, self._X, self.p


def _validate_matrix(D, seed):
    if not np.isfinite(D).all():
        raise ConsistencyError("distance matrix has non-finite entries")
    if (D < 0).any():
        raise ConsistencyError("distance matrix has negative entries")
    if np.any(np.diag(D) != 0):
        raise ConsistencyError("distance matrix diagonal must be zero")
    scale = float(D.max()) if D.size else 0.0
    tol = 1e-12 * max(scale, 1.0)
    if not np.allclose(D, D.T, rtol=0.0, atol=tol):
        raise ConsistencyError("distance matrix is not symmetric")
    n = D.shape[0]
    off = ~np.eye(n, dtype=bool)
    if (D[off] == 0).any():
        warnings.warn("distinct points at distance 0 (pseudometric input)", stacklevel=3)
    if n <= EXHAUSTIVE_TRIANGLE_MAX_N:
        for j in range(n):
            # D[i,k] <= D[i,j] + D[j,k] for all i, k
            if (D > D[:, j, None] + D[None, j, :] + tol).any():
                raise ConsistencyError("distance matrix violates the triangle inequality")
    else:
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(0, n, size=(3, SAMPLED_TRIANGLES))
        if (D[i, k] > D[i, j] + D[j, k] + tol).any():
            raise ConsistencyError("distance matrix violates the triangle inequality")


def _check_beta(beta):
    if not (0.0 < beta <= 1.0):
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")


def snowflake_distance(m, i, j, beta):
    _check_beta(beta)
    return m.dist(i, j) ** beta


def diameter(m, subset=None):
    subset = np.arange(m.n) if subset is None else m._check(subset)
    if subset.size == 0:
        raise ParameterError("diameter of an empty set")
    return kernels.max_pairwise(m, subset)


@dataclass(frozen=True)
class Net:
    centers: np.ndarray
    radius: float

    def __len__(self):
        return len(self.centers)


@dataclass(frozen=True)
class VoronoiPartition:
    """Cell membership of ``points``; ``labels[k]`` is a position into ``centers``."""

    points: np.ndarray
    centers: np.ndarray
    labels: np.ndarray

    @property
    def assignment(self):
        return dict(zip(self.points.tolist(), self.centers[self.labels].tolist()))

    @property
    def cells(self):
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(len(self.centers) + 1))
        return [self.points[order[bounds[c]:bounds[c + 1]]] for c in range(len(self.centers))]

    def cell_positions(self):
        """Like :attr:`cells` but as positions into :attr:`points`."""
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(len(self.centers) + 1))
        return [order[bounds[c]:bounds[c + 1]] for c in range(len(self.centers))]


def greedy_net_positions(m, subset, t):
    """Positions into ``subset`` of the greedy ``t``-net (index-order scan)."""
    if not t > 0:
        raise ParameterError(f"net radius must be positive, got {t}")
    subset = m._check(subset)
    if subset.size == 0:
        raise ParameterError("net of an empty set")
    return kernels.greedy_net_positions(m, subset, t)


def greedy_net(m, subset, t):
    """Scan ``subset`` in order; keep a point iff it is >= t from every kept point."""
    subset = m._check(subset)
    pos = greedy_net_positions(m, subset, t)
    return Net(centers=subset[pos], radius=float(t))


def voronoi(m, subset, net):
    subset = m._check(subset)
    centers = m._check(net.centers)
    if centers.size == 0:
        raise ConsistencyError("net has no centers")
    labels, dist = kernels.nearest_center(m, subset, centers)
    if subset.size and dist.max() > net.radius:
        raise ConsistencyError(
            f"net does not cover the subset: max distance {dist.max():g} > radius {net.radius:g}")
    return VoronoiPartition(points=subset, centers=centers, labels=labels)


def greedy_covering_number(m, t, subset=None):
    """Size of the greedy ``t``-net; an upper bound on the ``t``-covering number."""
    subset = np.arange(m.n) if subset is None else subset
    return len(greedy_net_positions(m, subset, t))
