"""Time the numba and numpy kernels on the same inputs.

    python3 benchmarks/bench_backends.py --n 2000 --repeat 3

The first numba call per kernel includes compilation (or a cache load) and
is reported separately from the steady-state time.
"""
import argparse
import time

import numpy as np

from holder_avg import kernels
from holder_avg.metric import MetricAccessor


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(n, d, seed, beta, metric):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    m = MetricAccessor.from_coords(X)
    if metric == "matrix":
        m = MetricAccessor.from_matrix(m.block(np.arange(n), np.arange(n)), validate=False)
    f = X.mean(axis=1)
    idx = np.arange(n)
    base = rng.choice(n, size=max(2, n // 20), replace=False)
    return {
        "slopes": lambda: kernels.slopes(m, idx, f, idx, f, beta),
        "pmse_values": lambda: kernels.pmse_values(m, base, f[base], idx, beta),
        "greedy_net": lambda: kernels.greedy_net_positions(m, idx, 0.05),
        "nearest_center": lambda: kernels.nearest_center(m, idx, base),
        "max_pairwise": lambda: kernels.max_pairwise(m, idx),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--metric", choices=("euclidean", "matrix"), default="euclidean")
    args = ap.parse_args(argv)

    work = cases(args.n, args.d, args.seed, args.beta, args.metric)
    print(f"n={args.n} d={args.d} beta={args.beta} metric={args.metric} repeat={args.repeat}")
    print(f"{'kernel':<16}{'numba first':>12}{'numba':>10}{'numpy':>10}{'speedup':>9}  agree")
    for name, fn in work.items():
        with kernels.use_backend("numba"):
            t0 = time.perf_counter()
            fn()
            first = time.perf_counter() - t0
            t_nb, out_nb = _time(fn, args.repeat)
        with kernels.use_backend("numpy"):
            t_np, out_np = _time(fn, args.repeat)
        agree = all(np.allclose(a, b, rtol=1e-12, atol=1e-12)
                    for a, b in zip(np.atleast_1d(out_nb) if not isinstance(out_nb, tuple) else out_nb,
                                    np.atleast_1d(out_np) if not isinstance(out_np, tuple) else out_np))
        print(f"{name:<16}{first:>12.4f}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>8.1f}x  {agree}")


if __name__ == "__main__":
    main()
