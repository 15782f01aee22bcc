"""Experiment configuration, presets, execution, and persistence.

An experiment is a preset problem family, a list of solver cells, and a
repetition count; every repetition regenerates data under its own seed,
runs each solver on a fresh objective, and scores everything against the
best objective value any solver found on that instance.  One CSV trace per
(solver, repetition) and one JSON summary are written.
"""

import dataclasses
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import BaselineConfig, afw_solve, fista_solve, fw_solve, twocd_solve
from .objectives import KdeHuber, LeastSquares, Logistic, Quadratic
from .polytope import L1Ball, StandardSimplex
from .problems import (RNG_NAME, KdeSpec, LassoSpec, LogisticSpec, gen_kde,
                       gen_lasso, gen_logistic)
from .solvers import LINE_SEARCH, SolveConfig, polycd_solve, polycdwa_solve

PRESETS = ("lasso", "logistic", "kde", "custom-simplex-quadratic")
SOLVER_NAMES = ("polycd", "polycdwa", "fw", "afw", "fista", "2cd")

_PROBLEM_KEYS = {
    "lasso": {"n", "d", "r", "snr", "rho", "c"},
    "logistic": {"n", "d", "r", "s", "rho", "c"},
    "kde": {"n", "d", "m", "outlier_rate", "sigma_kernel", "mu_huber"},
    "custom-simplex-quadratic": {"d", "mu"},
}


def compute_gap(f_hat, f_star):
    """Relative optimality gap (f_hat - f_star) / max(|f_star|, 1)."""
    return (f_hat - f_star) / max(abs(f_star), 1.0)


@dataclass
class SolverCell:
    name: str
    step_rule: str = LINE_SEARCH
    max_outer: int = 100
    rel_improve_tol: float = 1e-8
    max_iter: int | None = None  # baseline budget; None = per-method default
    window: int = 50
    window_tol: float = 1e-8
    rng_seed: int | None = None  # pair-descent draw seed; None = repetition seed
    smoothness: float | None = None  # user override of the certified L bound
    label: str | None = None

    def __post_init__(self):
        if self.name not in SOLVER_NAMES:
            raise ValueError(f"unknown solver {self.name!r}; known: {SOLVER_NAMES}")
        if self.label is None:
            self.label = self.name

    @classmethod
    def from_dict(cls, d):
        _reject_unknown(d, {f.name for f in dataclasses.fields(cls)}, "solver")
        return cls(**d)


@dataclass
class ExperimentConfig:
    preset: str
    problem: dict
    solvers: list
    repetitions: int = 5
    seeds: list | None = None
    out_dir: str = "results"

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; known: {PRESETS}")
        if not self.solvers:
            raise ValueError("need at least one solver")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        _reject_unknown(self.problem, _PROBLEM_KEYS[self.preset],
                        f"problem ({self.preset})")
        self.solvers = [s if isinstance(s, SolverCell) else SolverCell.from_dict(s)
                        for s in self.solvers]
        labels = [s.label for s in self.solvers]
        if len(set(labels)) != len(labels):
            raise ValueError("solver labels must be unique (set label explicitly)")
        if self.seeds is not None and len(self.seeds) != self.repetitions:
            raise ValueError("seeds must match repetitions")

    @classmethod
    def from_dict(cls, d):
        _reject_unknown(d, {f.name for f in dataclasses.fields(cls)}, "experiment")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        d = dataclasses.asdict(self)
        return d


def _reject_unknown(d, allowed, what):
    if not isinstance(d, dict):
        raise ValueError(f"{what} section must be a JSON object")
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown {what} keys: {sorted(unknown)}")


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------


class _Bundle:
    """One generated instance plus factories for per-solver objectives."""

    def __init__(self, preset, prob, seed):
        self.preset = preset
        self.seed = seed
        prob = dict(prob)
        if preset == "lasso":
            c_override = prob.pop("c", None)
            spec = LassoSpec(seed=seed, **prob)
            A, b, x_star, C = gen_lasso(spec)
            if c_override is not None:
                C = float(c_override)
            self.poly = L1Ball(spec.d, C)
            self._make = lambda L=None: LeastSquares(A, b, self.poly, L=L)
            B = np.hstack([A, -A]) * C
            lifted_poly = StandardSimplex(2 * spec.d)
            self._make_lifted = lambda L=None: LeastSquares(B, b, lifted_poly, L=L)
            self.lifted_poly = lifted_poly
            self.radius = C
            self.dim = spec.d
            self.twocd_budget = 100 * spec.d
        elif preset == "logistic":
            c_override = prob.pop("c", None)
            spec = LogisticSpec(seed=seed, **prob)
            A, labels, x_star, C = gen_logistic(spec)
            if c_override is not None:
                C = float(c_override)
            self.poly = L1Ball(spec.d, C)
            self._make = lambda L=None: Logistic(A, labels, self.poly, L=L)
            B = np.hstack([A, -A]) * C
            lifted_poly = StandardSimplex(2 * spec.d)
            self._make_lifted = lambda L=None: Logistic(B, labels, lifted_poly, L=L)
            self.lifted_poly = lifted_poly
            self.radius = C
            self.dim = spec.d
            self.twocd_budget = 100 * spec.d
        elif preset == "kde":
            spec = KdeSpec(seed=seed, **prob)
            X, _ = gen_kde(spec)
            self.poly = StandardSimplex(spec.n)
            self._make = lambda L=None: KdeHuber(X, spec.sigma_kernel,
                                                 spec.mu_huber, self.poly, L=L)
            self._make_lifted = self._make
            self.lifted_poly = self.poly
            self.dim = spec.n
            self.twocd_budget = 100 * spec.n
        elif preset == "custom-simplex-quadratic":
            d = int(prob["d"])
            mu = float(prob.get("mu", 0.0))
            rng = np.random.default_rng(seed)
            B = rng.standard_normal((2 * d, d))
            Q = B.T @ B / d + mu * np.eye(d)
            qlin = rng.standard_normal(d)
            self.poly = StandardSimplex(d)
            self._make = lambda L=None: Quadratic(Q, qlin, poly=self.poly)
            self._make_lifted = self._make
            self.lifted_poly = self.poly
            self.dim = d
            self.twocd_budget = 100 * d
        else:  # pragma: no cover - guarded by config validation
            raise ValueError(preset)

    def objective(self, lifted=False, L=None):
        return self._make_lifted(L=L) if lifted else self._make(L=L)

    def unlift(self, u):
        if self.preset in ("lasso", "logistic"):
            d = self.dim
            return self.radius * (u[:d] - u[d:])
        return u

    def lifted_nnz_fn(self, tol=1e-10):
        if self.preset in ("lasso", "logistic"):
            return lambda u: int(np.count_nonzero(np.abs(self.unlift(u)) > tol))
        return None


def run_solver_cell(cell, bundle):
    """Run one solver on one instance; returns (x_in_original_space, trace)."""
    if cell.name in ("polycd", "polycdwa"):
        cfg = SolveConfig(step_rule=cell.step_rule, max_outer=cell.max_outer,
                          rel_improve_tol=cell.rel_improve_tol)
        obj = bundle.objective(L=cell.smoothness)
        if cell.name == "polycd":
            x, trace = polycd_solve(obj, bundle.poly, cfg)
        else:
            x, _, trace = polycdwa_solve(obj, bundle.poly, cfg)
        return x, trace
    if cell.name == "2cd":
        obj = bundle.objective(lifted=True, L=cell.smoothness)
        cfg = BaselineConfig(
            max_iter=cell.max_iter or bundle.twocd_budget,
            window=cell.window, window_tol=cell.window_tol,
            rng_seed=cell.rng_seed if cell.rng_seed is not None else bundle.seed,
            record_every=max(1, bundle.lifted_poly.M // 4),
        )
        u, trace = twocd_solve(obj, bundle.lifted_poly, cfg,
                               nnz_fn=bundle.lifted_nnz_fn())
        return bundle.unlift(u), trace
    obj = bundle.objective(L=cell.smoothness)
    default_iter = {"fw": 5000, "afw": 5000, "fista": 1000}[cell.name]
    cfg = BaselineConfig(max_iter=cell.max_iter or default_iter,
                         window=cell.window, window_tol=cell.window_tol)
    solver = {"fw": fw_solve, "afw": afw_solve, "fista": fista_solve}[cell.name]
    x, trace = solver(obj, bundle.poly, cfg)
    return x, trace


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------

_TRACE_HEADER = "solver,rep,t,seconds,f_value,gap,nnz"


def _write_trace(path, label, rep, trace, f_star):
    lines = [_TRACE_HEADER]
    for r in trace:
        gap = compute_gap(r.f_value, f_star)
        lines.append(f"{label},{rep},{r.t},{r.elapsed:.17g},"
                     f"{r.f_value:.17g},{gap:.17g},{r.nnz}")
    Path(path).write_text("\n".join(lines) + "\n")


def emit_plot_data(traces, f_star, path):
    """Write gap-vs-iteration/time series for any plotting tool.

    traces: mapping solver label -> trace list sharing the f_star reference.
    Columns: solver, t, seconds, gap.
    """
    lines = ["solver,t,seconds,gap"]
    for label, trace in traces.items():
        for r in trace:
            lines.append(f"{label},{r.t},{r.elapsed:.17g},"
                         f"{compute_gap(r.f_value, f_star):.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def run_experiment(cfg, quiet=False):
    """Execute every (repetition, solver) cell, persist traces and a JSON
    summary, and return the summary dict.  Solver failures are recorded and
    excluded from the means with a warning rather than aborting the run."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seeds = list(cfg.seeds) if cfg.seeds is not None else list(range(cfg.repetitions))
    per_solver = {cell.label: [] for cell in cfg.solvers}
    f_stars = []
    errors = []

    for rep, seed in enumerate(seeds):
        bundle = _Bundle(cfg.preset, cfg.problem, seed)
        rep_results = {}
        for cell in cfg.solvers:
            try:
                x, trace = run_solver_cell(cell, bundle)
                rep_results[cell.label] = (x, trace)
            except Exception as exc:  # noqa: BLE001 - record and continue
                msg = f"{cell.label} failed on rep {rep}: {exc!r}"
                errors.append({"solver": cell.label, "rep": rep, "error": repr(exc)})
                warnings.warn(msg)
        if not rep_results:
            continue
        f_star = min(min(r.f_value for r in trace)
                     for _, trace in rep_results.values())
        f_stars.append(f_star)
        emit_plot_data({label: trace for label, (x, trace) in rep_results.items()},
                       f_star, out / f"plot_rep{rep}.csv")
        for label, (x, trace) in rep_results.items():
            _write_trace(out / f"trace_{label}_rep{rep}.csv",
                         label, rep, trace, f_star)
            f_best = min(r.f_value for r in trace)
            per_solver[label].append({
                "runtime": trace[-1].elapsed,
                "gap": compute_gap(f_best, f_star),
                "nnz": trace[-1].nnz,
                "f_best": f_best,
            })
            if not quiet:
                print(f"rep {rep} {label:>10s}: f={f_best:.9e} "
                      f"gap={compute_gap(f_best, f_star):.2e} "
                      f"time={trace[-1].elapsed:.3f}s nnz={trace[-1].nnz}")

    summary = {
        "preset": cfg.preset,
        "config": cfg.to_dict(),
        "rng": RNG_NAME,
        "version": _pkg_version(),
        "seeds": seeds,
        "f_star_per_rep": f_stars,
        "solvers": {},
        "errors": errors,
    }
    for label, cells in per_solver.items():
        if not cells:
            summary["solvers"][label] = {"failed": True}
            continue
        summary["solvers"][label] = {
            "mean_runtime": float(np.mean([c["runtime"] for c in cells])),
            "mean_gap": float(np.mean([c["gap"] for c in cells])),
            "mean_nnz": float(np.mean([c["nnz"] for c in cells])),
            "repetitions": len(cells),
        }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


def _pkg_version():
    try:
        from importlib.metadata import version

        return version("polycd")
    except Exception:  # pragma: no cover
        return "unknown"
