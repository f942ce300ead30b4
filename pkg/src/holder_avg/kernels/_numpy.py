"""Pure-numpy implementations, block-vectorised.

Each function mirrors its counterpart in ``_numba`` operation for operation,
so both backends agree on tie-breaking.
"""
import numpy as np

# entries per distance block
_BLOCK = 1 << 22


def _chunks(n_rows, n_cols):
    step = max(1, _BLOCK // max(1, n_cols))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))


def slopes(m, q_idx, q_val, r_idx, r_val, beta):
    out = np.zeros(q_idx.shape[0])
    if r_idx.shape[0] == 0:
        return out
    for sl in _chunks(q_idx.shape[0], r_idx.shape[0]):
        d = m.block(q_idx[sl], r_idx)
        diff = np.abs(q_val[sl, None] - r_val[None, :])
        live = diff != 0.0
        clash = live & (d == 0.0)
        if beta != 1.0:
            d = d ** beta
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(live & ~clash, diff / np.where(d == 0.0, 1.0, d), 0.0)
        best = s.max(axis=1)
        best[clash.any(axis=1)] = np.inf
        out[sl] = best
    return out


def _pmse_rows(a, f, rtol, max_iter):
    rows = np.arange(a.shape[0])
    lam = np.zeros(a.shape[0])
    active = np.ones(a.shape[0], dtype=bool)
    for _ in range(max_iter):
        idx = rows[active]
        if idx.size == 0:
            break
        sub = a[idx]
        la = lam[idx, None] * sub
        bv = np.argmax(f[None, :] - la, axis=1)
        bu = np.argmax(-f[None, :] - la, axis=1)
        r = (f[bv] - f[bu]) / (sub[np.arange(idx.size), bu] + sub[np.arange(idx.size), bv])
        grow = r > lam[idx]
        lam[idx[grow]] = r[grow]
        active[idx[~grow]] = False
    thr = lam * (1.0 - rtol)
    c = f[None, :] - thr[:, None] * a
    mv = c.max(axis=1)
    u = np.argmax((mv[:, None] - (f[None, :] + thr[:, None] * a)) >= 0.0, axis=1)
    au = a[rows, u]
    lhs = f[u] + thr * au
    v = np.argmax((c - lhs[:, None]) >= 0.0, axis=1)
    av = a[rows, v]
    r = (f[v] - f[u]) / (au + av)
    val = f[u] + r * au
    return np.minimum(np.maximum(val, f[u]), f[v])


def pmse_values(m, base_idx, base_val, targets, beta, rtol, max_iter):
    out = np.empty(targets.shape[0])
    for sl in _chunks(targets.shape[0], base_idx.shape[0]):
        d = m.block(targets[sl], base_idx)
        zero = d == 0.0
        hit = zero.any(axis=1)
        res = np.empty(d.shape[0])
        if hit.any():
            res[hit] = base_val[np.argmax(zero[hit], axis=1)]
        miss = ~hit
        if miss.any():
            a = d[miss] if beta == 1.0 else d[miss] ** beta
            res[miss] = _pmse_rows(a, base_val, rtol, max_iter)
        out[sl] = res
    return out


def greedy_net(m, subset, t):
    centers = []
    center_pts = np.empty(0, dtype=np.int64)
    for s, i in enumerate(subset):
        if center_pts.size == 0 or not (m.block(np.array([i]), center_pts)[0] < t).any():
            centers.append(s)
            center_pts = np.append(center_pts, i)
    return np.asarray(centers, dtype=np.int64)


def nearest_center(m, points, centers):
    pos = np.empty(points.shape[0], dtype=np.int64)
    dist = np.empty(points.shape[0])
    for sl in _chunks(points.shape[0], centers.shape[0]):
        d = m.block(points[sl], centers)
        arg = np.argmin(d, axis=1)
        pos[sl] = arg
        dist[sl] = d[np.arange(d.shape[0]), arg]
    return pos, dist


def max_pairwise(m, subset):
    best = 0.0
    for sl in _chunks(subset.shape[0], subset.shape[0]):
        d = m.block(subset[sl], subset)
        if d.size:
            best = max(best, float(d.max()))
    return best
