"""Command-line interface.

Subcommands:
  solve          one problem instance, one solver, prints the result
  bench          full multi-solver comparison driven by a JSON config
  verify         run the condensed property suite (pass/fail per property)
  gen            generate and dump a synthetic dataset
  bench-kernels  time one solver pass per objective family on the numba
                 and numpy kernel backends
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import _kernels
from .harness import (PRESETS, SOLVER_NAMES, ExperimentConfig, SolverCell,
                      run_experiment)
from .problems import (KdeSpec, LassoSpec, LogisticSpec, dump_tsv, gen_kde,
                       gen_lasso, gen_logistic)
from .solvers import GRAD_1D, LINE_SEARCH


def _add_problem_flags(p):
    p.add_argument("--preset", choices=PRESETS, default="lasso")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=200)
    p.add_argument("--r", type=int, default=20)
    p.add_argument("--snr", type=float, default=1.0)
    p.add_argument("--s", type=float, default=None,
                   help="signal scale (logistic preset)")
    p.add_argument("--rho", type=float, default=None,
                   help="design correlation (lasso/logistic)")
    p.add_argument("--c", type=float, default=None,
                   help="l1 radius override (default ||x*||_1)")
    p.add_argument("--m", type=int, default=None,
                   help="mixture components (kde preset)")
    p.add_argument("--sigma-kernel", type=float, default=None)
    p.add_argument("--mu-huber", type=float, default=None)
    p.add_argument("--mu", type=float, default=None,
                   help="strong-convexity shift (quadratic preset)")
    p.add_argument("--seed", type=int, default=0)


def _problem_dict(args):
    preset = args.preset
    if preset == "lasso":
        prob = {"n": args.n, "d": args.d, "r": args.r, "snr": args.snr}
        if args.rho is not None:
            prob["rho"] = args.rho
        if args.c is not None:
            prob["c"] = args.c
    elif preset == "logistic":
        prob = {"n": args.n, "d": args.d, "r": args.r}
        if args.s is not None:
            prob["s"] = args.s
        if args.rho is not None:
            prob["rho"] = args.rho
        if args.c is not None:
            prob["c"] = args.c
    elif preset == "kde":
        prob = {"n": args.n}
        if args.d != 200:
            prob["d"] = args.d
        if args.m is not None:
            prob["m"] = args.m
        if args.sigma_kernel is not None:
            prob["sigma_kernel"] = args.sigma_kernel
        if args.mu_huber is not None:
            prob["mu_huber"] = args.mu_huber
    else:
        prob = {"d": args.d}
        if args.mu is not None:
            prob["mu"] = args.mu
    return prob


def _cmd_solve(args):
    cell = SolverCell(name=args.solver, step_rule=args.step_rule,
                      max_outer=args.max_outer,
                      rel_improve_tol=args.tol,
                      max_iter=args.max_iter,
                      smoothness=args.smoothness)
    cfg = ExperimentConfig(preset=args.preset, problem=_problem_dict(args),
                           solvers=[cell], repetitions=1, seeds=[args.seed],
                           out_dir=args.out)
    summary = run_experiment(cfg)
    print(json.dumps(summary["solvers"], indent=2))
    return 0


def _cmd_bench(args):
    cfg = ExperimentConfig.from_json(args.config)
    summary = run_experiment(cfg)
    print(json.dumps(summary["solvers"], indent=2))
    return 0


def _cmd_verify(args):
    from .verify import run_verification

    checks = run_verification(verbose=True, seed=args.seed)
    bad = [name for name, ok, _ in checks if not ok]
    print(f"\n{len(checks) - len(bad)}/{len(checks)} properties passed")
    if bad:
        print("failed:", ", ".join(bad))
        return 1
    return 0


def _cmd_gen(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prob = _problem_dict(args)
    meta = {"preset": args.preset, "seed": args.seed, "problem": prob}
    if args.preset == "lasso":
        A, b, x_star, C = gen_lasso(LassoSpec(seed=args.seed, **{
            k: v for k, v in prob.items() if k != "c"}))
        dump_tsv(out / "A.tsv", A)
        dump_tsv(out / "b.tsv", b)
        dump_tsv(out / "x_star.tsv", x_star)
        meta["C"] = C
    elif args.preset == "logistic":
        A, labels, x_star, C = gen_logistic(LogisticSpec(seed=args.seed, **{
            k: v for k, v in prob.items() if k != "c"}))
        dump_tsv(out / "A.tsv", A)
        dump_tsv(out / "labels.tsv", labels)
        dump_tsv(out / "x_star.tsv", x_star)
        meta["C"] = C
    elif args.preset == "kde":
        X, truth = gen_kde(KdeSpec(seed=args.seed, **prob))
        dump_tsv(out / "points.tsv", X)
        meta["n_inliers"] = truth["n_inliers"]
        meta["n_outliers"] = truth["n_outliers"]
    else:
        raise SystemExit("gen supports the data presets (lasso/logistic/kde)")
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {args.preset} dataset to {out}")
    return 0


def _cmd_bench_kernels(args):
    from .objectives import KdeHuber, LeastSquares, Logistic
    from .polytope import L1Ball
    from .solvers import SolveConfig, polycdwa_solve

    n, d = args.n, args.d
    rng = np.random.default_rng(0)
    cases = []
    A = rng.standard_normal((n, d))
    b = A @ (rng.random(d) < 0.05) + rng.standard_normal(n)
    cases.append(("least-squares / l1 ball",
                  lambda: LeastSquares(A, b, L1Ball(d, 5.0))))
    labels = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    cases.append(("logistic / l1 ball",
                  lambda: Logistic(A, labels, L1Ball(d, 5.0))))
    pts = rng.standard_normal((min(n, 1000), 2)) * 3
    cases.append(("kernel density / simplex",
                  lambda: KdeHuber(pts, 1.0, 0.4)))

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    cfg = SolveConfig(max_outer=args.passes, rel_improve_tol=0.0)
    prev = _kernels.active_backend()
    print(f"{'case':<28s} " + " ".join(f"{bk:>12s}" for bk in backends)
          + ("      speedup" if len(backends) == 2 else ""))
    try:
        for name, make in cases:
            times = {}
            for bk in backends:
                _kernels.use_backend(bk)
                if bk == "numba":
                    # compile outside the timed region
                    obj = make()
                    polycdwa_solve(obj, None, SolveConfig(max_outer=1,
                                                          rel_improve_tol=0.0))
                obj = make()
                t0 = time.perf_counter()
                polycdwa_solve(obj, None, cfg)
                times[bk] = (time.perf_counter() - t0) / args.passes
            row = f"{name:<28s} " + " ".join(
                f"{times[bk]:>10.4f} s" for bk in backends)
            if len(backends) == 2:
                row += f"   {times['numpy'] / times['numba']:>8.1f}x"
            print(row)
    finally:
        _kernels.use_backend(prev)
    if len(backends) == 1:
        print("(numba not installed; numpy fallback only)")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="polycd",
        description="cyclic vertex descent solvers over vertex-enumerated "
                    "polytopes, with benchmark and verification harnesses")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("solve", help="run one solver on one instance")
    _add_problem_flags(p)
    p.add_argument("--solver", choices=SOLVER_NAMES, default="polycdwa")
    p.add_argument("--step-rule", choices=[LINE_SEARCH, GRAD_1D],
                   default=LINE_SEARCH)
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--max-iter", type=int, default=None,
                   help="iteration budget for the baseline solvers")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="relative-improvement stop")
    p.add_argument("--smoothness", type=float, default=None,
                   help="override the certified smoothness bound L")
    p.add_argument("--out", default="results",
                   help="output directory for trace/summary")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="full comparison from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("gen", help="dump a synthetic dataset")
    _add_problem_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench-kernels",
                       help="compare the numba and numpy kernel backends")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--d", type=int, default=500)
    p.add_argument("--passes", type=int, default=3)
    p.set_defaults(func=_cmd_bench_kernels)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
