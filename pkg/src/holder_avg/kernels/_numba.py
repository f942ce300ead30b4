"""numba implementations of the hot loops.

Distances are computed on the fly: ``mode == 0`` reads the explicit matrix
``D``; ``mode == 1`` evaluates the p-norm between rows of ``X``.
"""
import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True, error_model="numpy")


@njit(**_JIT)
def _dist(i, j, mode, D, X, p):
    if mode == 0:
        return D[i, j]
    s = 0.0
    if p == 2.0:
        for k in range(X.shape[1]):
            t = X[i, k] - X[j, k]
            s += t * t
        return np.sqrt(s)
    if p == 1.0:
        for k in range(X.shape[1]):
            s += abs(X[i, k] - X[j, k])
        return s
    if np.isinf(p):
        for k in range(X.shape[1]):
            t = abs(X[i, k] - X[j, k])
            if t > s:
                s = t
        return s
    for k in range(X.shape[1]):
        s += abs(X[i, k] - X[j, k]) ** p
    return s ** (1.0 / p)


@njit(**_JIT)
def _gather(mode, X, idx):
    """Coordinates of ``idx`` laid out one row per dimension."""
    if mode == 0:
        return np.zeros((1, 1))
    out = np.empty((X.shape[1], idx.shape[0]))
    for k in range(X.shape[1]):
        for b in range(idx.shape[0]):
            out[k, b] = X[idx[b], k]
    return out


@njit(**_JIT)
def _row_powers(i, cols, RX, mode, D, X, p, beta, buf):
    """``buf[b] = d(i, cols[b]) ** beta``, written as branch-free inner loops."""
    n = cols.shape[0]
    if mode == 0:
        for b in range(n):
            buf[b] = D[i, cols[b]]
    else:
        for b in range(n):
            buf[b] = 0.0
        for k in range(RX.shape[0]):
            xi = X[i, k]
            row = RX[k]
            if p == 2.0:
                for b in range(n):
                    t = row[b] - xi
                    buf[b] += t * t
            elif p == 1.0:
                for b in range(n):
                    buf[b] += abs(row[b] - xi)
            elif np.isinf(p):
                for b in range(n):
                    buf[b] = max(buf[b], abs(row[b] - xi))
            else:
                for b in range(n):
                    buf[b] += abs(row[b] - xi) ** p
        if p == 2.0:
            for b in range(n):
                buf[b] = np.sqrt(buf[b])
        elif not (p == 1.0 or np.isinf(p)):
            for b in range(n):
                buf[b] = buf[b] ** (1.0 / p)
    if beta != 1.0:
        for b in range(n):
            buf[b] = buf[b] ** beta


@njit(**_JIT)
def slopes(mode, D, X, p, q_idx, q_val, r_idx, r_val, beta):
    out = np.zeros(q_idx.shape[0])
    RX = _gather(mode, X, r_idx)
    buf = np.empty(r_idx.shape[0])
    for a in range(q_idx.shape[0]):
        _row_powers(q_idx[a], r_idx, RX, mode, D, X, p, beta, buf)
        fi = q_val[a]
        best = 0.0
        for b in range(r_idx.shape[0]):
            diff = abs(fi - r_val[b])
            # diff / 0 is inf under the numpy error model
            s = diff / buf[b] if diff > 0.0 else 0.0
            best = max(best, s)
        out[a] = best
    return out


@njit(**_JIT)
def _pmse_from_powers(a, f, rtol, max_iter):
    k = a.shape[0]
    # Dinkelbach iteration on max_{u,v} (f_v - f_u) / (a_u + a_v)
    lam = 0.0
    for _ in range(max_iter):
        bv = 0
        cv = f[0] - lam * a[0]
        bu = 0
        cu = -f[0] - lam * a[0]
        for w in range(1, k):
            c = f[w] - lam * a[w]
            if c > cv:
                cv = c
                bv = w
            c = -f[w] - lam * a[w]
            if c > cu:
                cu = c
                bu = w
        r = (f[bv] - f[bu]) / (a[bu] + a[bv])
        if r <= lam:
            break
        lam = r
    # lexicographically smallest pair within rtol of the optimum
    thr = lam * (1.0 - rtol)
    mv = -np.inf
    for w in range(k):
        c = f[w] - thr * a[w]
        if c > mv:
            mv = c
    u = 0
    for w in range(k):
        if mv - (f[w] + thr * a[w]) >= 0.0:
            u = w
            break
    lhs = f[u] + thr * a[u]
    v = 0
    for w in range(k):
        if (f[w] - thr * a[w]) - lhs >= 0.0:
            v = w
            break
    r = (f[v] - f[u]) / (a[u] + a[v])
    val = f[u] + r * a[u]
    if val < f[u]:
        val = f[u]
    elif val > f[v]:
        val = f[v]
    return val


@njit(**_JIT)
def pmse_values(mode, D, X, p, base_idx, base_val, targets, beta, rtol, max_iter):
    k = base_idx.shape[0]
    out = np.empty(targets.shape[0])
    RX = _gather(mode, X, base_idx)
    a = np.empty(k)
    for t in range(targets.shape[0]):
        _row_powers(targets[t], base_idx, RX, mode, D, X, p, beta, a)
        hit = -1
        for u in range(k):
            if a[u] == 0.0:
                hit = u
                break
        if hit >= 0:
            out[t] = base_val[hit]
        else:
            out[t] = _pmse_from_powers(a, base_val, rtol, max_iter)
    return out


@njit(**_JIT)
def greedy_net(mode, D, X, p, subset, t):
    centers = np.empty(subset.shape[0], dtype=np.int64)
    k = 0
    for s in range(subset.shape[0]):
        i = subset[s]
        ok = True
        for c in range(k):
            if _dist(i, subset[centers[c]], mode, D, X, p) < t:
                ok = False
                break
        if ok:
            centers[k] = s
            k += 1
    return centers[:k].copy()


@njit(**_JIT)
def nearest_center(mode, D, X, p, points, centers):
    pos = np.empty(points.shape[0], dtype=np.int64)
    dist = np.empty(points.shape[0])
    RX = _gather(mode, X, centers)
    buf = np.empty(centers.shape[0])
    for a in range(points.shape[0]):
        _row_powers(points[a], centers, RX, mode, D, X, p, 1.0, buf)
        best = np.inf
        arg = -1
        for c in range(centers.shape[0]):
            if buf[c] < best:
                best = buf[c]
                arg = c
        pos[a] = arg
        dist[a] = best
    return pos, dist


@njit(**_JIT)
def max_pairwise(mode, D, X, p, subset):
    RX = _gather(mode, X, subset)
    buf = np.empty(subset.shape[0])
    best = 0.0
    for a in range(subset.shape[0]):
        _row_powers(subset[a], subset, RX, mode, D, X, p, 1.0, buf)
        for b in range(a + 1, subset.shape[0]):
            best = max(best, buf[b])
    return best
