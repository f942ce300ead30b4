"""Command-line entry point: ``holder-avg <subcommand> ...``."""
import argparse
import math
import sys

import numpy as np

from . import __version__, kernels
from .bracketing import BracketParams, bracket_for_function, verify_bracket
from .errors import HolderAvgError, ParameterError
from .experiments import (GeneratorSpec, examples_table, grid_nodes, lowerbound_trial,
                          risk_sweep)
from .io import (dump_json, load_column, load_labeled, load_space, load_targets,
                 write_csv, write_sidecar)
from .learner import (LabeledSample, LearnerConfig, empirical_risk, hypothesis_from_dict,
                      learn)
from .metric import MetricAccessor
from .pmse import pmse_extend_all, pmse_fit
from .smoothness import DiscreteMeasure


def _norm(text):
    return math.inf if text in ("inf", "infinity") else float(text)


def _int_list(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _space_args(p):
    p.add_argument("--space", help="CSV defining the point set (needed for index columns)")
    p.add_argument("--metric", choices=("euclidean", "matrix"), default="euclidean")
    p.add_argument("--p", type=_norm, default=2.0, help="p-norm for coordinate spaces")


def _load_space_opt(args):
    return load_space(args.space, args.metric, args.p) if args.space else None


def _with_targets(coords_base, p, target_coords):
    """Space made of the base coordinates followed by the target coordinates."""
    if coords_base.shape[1] != target_coords.shape[1]:
        raise ParameterError("targets and base points differ in dimension")
    m = MetricAccessor.from_coords(np.vstack([coords_base, target_coords]), p=p)
    k = len(coords_base)
    return m, np.arange(k), np.arange(k, k + len(target_coords))


# ---------------------------------------------------------------------------


def cmd_learn(args):
    space = _load_space_opt(args)
    m, pts, labels, coords = load_labeled(args.data, ("y", "label", "value"), space, args.p)
    S = LabeledSample(pts, labels)
    if args.gamma is not None:
        if args.epsilon is not None or args.L is not None:
            raise ParameterError("--gamma excludes --epsilon/--L")
        cfg = LearnerConfig(beta=args.beta, gamma=args.gamma, seed=args.seed)
    elif args.epsilon is not None:
        cfg = LearnerConfig(beta=args.beta, epsilon=args.epsilon, L=args.L, seed=args.seed)
    else:
        raise ParameterError("give --gamma or --epsilon (with optional --L)")
    h = learn(m, S, cfg)
    model = h.provenance()
    model["version"] = __version__
    model["empirical_risk"] = empirical_risk(h, S)
    if coords is None:
        model["metric"] = {"kind": args.metric, "p": args.p, "n": m.n}
    else:
        model["metric"] = {"kind": "coords", "p": args.p,
                           "base_coords": coords[h.model.base_indices].tolist()}
    if model["l_hat_heuristic"]:
        print("note: L estimated from the sample's empirical slope (heuristic)", file=sys.stderr)
    dump_json(model, args.out)
    return 0


def cmd_predict(args):
    import json
    from pathlib import Path

    model = json.loads(Path(args.model).read_text())
    meta = model.get("metric", {})
    if meta.get("kind") == "coords":
        base = np.asarray(meta["base_coords"], dtype=np.float64)
        idx, tcoords = load_targets(args.targets)
        if tcoords is None:
            raise ParameterError("this model was fit on coordinates; give coordinate targets")
        m, base_idx, tidx = _with_targets(base, meta["p"], tcoords)
        model = dict(model, base_indices=base_idx.tolist())
    else:
        if not args.space:
            raise ParameterError("this model indexes a space file; pass --space")
        m = load_space(args.space, meta.get("kind", args.metric), meta.get("p", args.p))
        tidx, tcoords = load_targets(args.targets, m)
        if tidx is None:
            raise ParameterError("targets must be an index column for a space-backed model")
    h = hypothesis_from_dict(m, model)
    values = h.predict(tidx)
    write_csv(({"index": i, "value": float(v)} for i, v in enumerate(values)),
              ["index", "value"], args.out)
    return 0


def cmd_pmse_eval(args):
    space = _load_space_opt(args)
    m, pts, vals, coords = load_labeled(args.base, ("value", "y", "f"), space, args.p)
    if coords is not None:
        _, tcoords = load_targets(args.targets)
        m, pts, tidx = _with_targets(coords, args.p, tcoords)
    else:
        tidx, _ = load_targets(args.targets, m)
        if tidx is None:
            raise ParameterError("base uses indices, so targets must too")
    out = pmse_extend_all(pmse_fit(m, pts, vals, args.beta), tidx)
    write_csv(({"index": i, "value": float(v)} for i, v in enumerate(out)),
              ["index", "value"], args.out)
    return 0


def cmd_bracket_check(args):
    m = load_space(args.data, args.metric, args.p)
    f = load_column(args.f, ("f", "value", "y"))
    mu = DiscreteMeasure.from_masses(load_column(args.mu, ("mu", "weight", "mass")))
    params = BracketParams(args.epsilon, args.L, args.beta)
    b = bracket_for_function(m, mu, f, params)
    report = verify_bracket(b, f, mu).to_dict()
    report.update(K=params.K, eps_prime=params.eps_prime, net_radius=params.net_radius)
    dump_json(report, args.out)
    return 0


def cmd_examples(args):
    if args.resolution < 16:
        raise ParameterError("resolution must be at least 16")
    top = int(math.log2(args.resolution))
    resolutions = [2 ** k for k in range(4, top + 1)]
    if resolutions[-1] != args.resolution:
        resolutions.append(args.resolution)
    rows = examples_table(args.which, args.beta, resolutions)
    write_csv(rows, list(rows[0]), args.out)
    write_sidecar(args.out, {"command": "examples", "which": args.which, "beta": args.beta,
                             "resolutions": resolutions, "backend": kernels.backend()})
    return 0


def cmd_risk_sweep(args):
    gen = GeneratorSpec.parse(args.gen)
    if gen.kind not in ("grid-uniform", "example1", "example2"):
        raise ParameterError("risk-sweep supports grid-uniform, example1 and example2")
    res = risk_sweep(gen, args.n, args.trials, seed=args.seed)
    fields = ["n", "trial", "empirical_risk", "true_risk", "true_risk_stderr", "gamma", "net_size"]
    write_csv(res.rows, fields, args.out)
    summary = {"n_grid": list(res.n_grid), "mean_risk": list(res.mean_risk),
               "slope": res.slope, "slope_stderr": res.stderr, "degenerate": res.degenerate,
               "target_slope": -gen.beta / (gen.d + gen.beta)}
    write_sidecar(args.out, {"command": "risk-sweep", "gen": args.gen, "trials": args.trials,
                             "seed": args.seed, "backend": kernels.backend(), "summary": summary})
    if args.out is not None:
        dump_json(summary)
    return 0


def cmd_lowerbound(args):
    if args.space:
        m = load_space(args.space, args.metric, args.p)
    else:
        m = MetricAccessor.from_coords(grid_nodes(args.resolution))
    rows = []
    for n in args.n:
        r = lowerbound_trial(m, args.epsilon, args.L, args.beta, n, args.trials, seed=args.seed)
        rows.append({"n": n, "mean_risk": r.mean_risk, "stderr": r.stderr, "k_size": r.k_size,
                     "epsilon_over_8": args.epsilon / 8.0, "trials": args.trials})
    write_csv(rows, list(rows[0]), args.out)
    write_sidecar(args.out, {"command": "lowerbound", "epsilon": args.epsilon, "L": args.L,
                             "beta": args.beta, "n": args.n, "trials": args.trials,
                             "seed": args.seed, "space": args.space,
                             "resolution": None if args.space else args.resolution,
                             "backend": kernels.backend()})
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="holder-avg",
                                 description="Learning average-Hölder functions on finite metric spaces.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--backend", choices=("numba", "numpy"),
                    help="kernel backend (default from HOLDER_AVG_BACKEND)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="fit a hypothesis to a labeled sample")
    p.add_argument("--data", required=True, help="CSV with x0..x{d-1},y or index,y")
    _space_args(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="model JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("predict", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--targets", required=True)
    _space_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("pmse-eval", help="minimal-slope extension from a base set")
    p.add_argument("--base", required=True, help="CSV with x0..x{d-1},value or index,value")
    p.add_argument("--targets", required=True)
    p.add_argument("--beta", type=float, required=True)
    _space_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pmse_eval)

    p = sub.add_parser("bracket-check", help="build and verify the bracket of one function")
    p.add_argument("--data", required=True, help="space CSV")
    p.add_argument("--f", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--metric", choices=("euclidean", "matrix"), default="euclidean")
    p.add_argument("--p", type=_norm, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bracket_check)

    p = sub.add_parser("examples", help="slope functionals of the gap examples vs resolution")
    p.add_argument("--which", type=int, choices=(1, 2), required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--resolution", type=int, default=4096)
    p.add_argument("--out")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("risk-sweep", help="risk decay of the learner over sample sizes")
    p.add_argument("--gen", required=True, help="e.g. grid-uniform:beta=0.5,resolution=4096")
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_risk_sweep)

    p = sub.add_parser("lowerbound", help="learner risk on the adversarial construction")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=1024,
                   help="uniform grid on [0,1] used when --space is absent")
    _space_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lowerbound)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.backend:
        kernels.set_backend(args.backend)
    try:
        return args.func(args)
    except (HolderAvgError, ValueError, OSError) as e:
        print(f"holder-avg {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
