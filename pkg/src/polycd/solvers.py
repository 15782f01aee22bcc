"""Cyclic vertex descent over a polytope, plain and with away steps.

Both solvers sweep the vertex list in a fixed cyclic order; per inner step
the iterate moves along the segment toward the visited vertex with a step
chosen either by exact line search or by the one-dimensional gradient rule.
The away variant additionally maintains the convex-combination weights of
the iterate and allows backward steps down to -gamma_i, where
gamma_i = lam_i / (1 - lam_i) is the largest feasible move away from
vertex i.

Structured problems (the composite and kernel-density objectives over the
simplex / l1 ball) run whole outer passes inside compiled kernels; see
``_kernels`` for the backend selection.  Everything else runs through the
per-step objective API, which produces the same trajectories.
"""

from dataclasses import dataclass
import math
import time

import numpy as np

from . import _kernels
from .objectives import grad_step_alpha

LINE_SEARCH = "line_search"
GRAD_1D = "grad"
_RULES = (LINE_SEARCH, GRAD_1D)


class ConsistencyError(RuntimeError):
    pass


@dataclass
class SolveConfig:
    step_rule: str = LINE_SEARCH
    max_outer: int = 100
    # stop when (f(x^t) - f(x^{t+1})) / max(|f(x^t)|, 1) falls below this
    rel_improve_tol: float = 1e-8
    visit_order: np.ndarray | None = None  # permutation of range(M); None = cyclic
    start_vertex: int = 0
    x0: np.ndarray | None = None  # explicit start (plain solver only)
    lam0: np.ndarray | None = None  # explicit start weights (away solver)
    gamma_cap: float = 1e12
    drop_tol: float = 1e-14  # snap-to-drop tolerance around alpha = -gamma
    ls_tol: float = 1e-12
    ls_max_iter: int = 200
    use_kernels: bool | None = None  # None = auto-detect
    nnz_tol: float = 1e-10
    # away-variant speedup: skip zero-weight vertices with no descent
    # (per-step path only; off by default to keep the full cycle)
    skip_zero_weight: bool = False
    # 1D gradient rule with the directional curvature ||A(v-x)||^2 of the
    # composite losses instead of the global L ||v-x||^2 (per-step path)
    directional_curvature: bool = False

    def __post_init__(self):
        if self.step_rule not in _RULES:
            raise ValueError(f"step_rule must be one of {_RULES}")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.rel_improve_tol < 0:
            raise ValueError("rel_improve_tol must be nonnegative")


@dataclass
class TraceRecord:
    t: int
    f_value: float
    elapsed: float
    inner_steps: int
    nnz: int


@dataclass
class AwayState:
    """Convex-combination weights lam with x = sum_j lam_j v_j."""

    lam: np.ndarray

    @property
    def support(self):
        return np.flatnonzero(self.lam > 0.0)


def away_gamma(lam_i):
    """Largest feasible backward step lam_i / (1 - lam_i); +inf at lam_i = 1."""
    if not 0.0 <= lam_i <= 1.0:
        raise ValueError(f"weight {lam_i} outside [0, 1]")
    if lam_i >= 1.0:
        return math.inf
    return lam_i / (1.0 - lam_i)


def weight_refresh(state, x, poly, tol=1e-6):
    """Numerical hygiene for the weight vector: clip tiny negatives, rescale
    to sum exactly 1, and verify that the weights still reconstruct x.
    Raises ConsistencyError when x and lam have irrecoverably diverged."""
    lam = state.lam
    np.maximum(lam, 0.0, out=lam)
    s = lam.sum()
    if not s > 0:
        raise ConsistencyError("weight vector collapsed to zero")
    if s != 1.0:
        lam /= s
    recon = poly.combination(lam)
    err = np.linalg.norm(recon - x)
    if err > tol * (1.0 + np.linalg.norm(x)):
        raise ConsistencyError(
            f"weights no longer reconstruct the iterate (error {err:.3e})")
    return state


def _count_nnz(x, tol):
    return int(np.count_nonzero(np.abs(x) > tol))


def _resolve_order(M, visit_order):
    if visit_order is None:
        return np.arange(M, dtype=np.int64)
    order = np.asarray(visit_order, dtype=np.int64)
    if order.shape != (M,) or not np.array_equal(np.sort(order), np.arange(M)):
        raise ValueError("visit_order must be a permutation of range(M)")
    return order


def _inner_step(obj, i, lo, cfg):
    """Choose the step toward vertex i on [lo, 1] and return it (not applied)."""
    if cfg.step_rule == GRAD_1D:
        if cfg.directional_curvature:
            b, c_dir, L_dir = obj.segment_query_directional(i)
            return grad_step_alpha(b, c_dir, L_dir, lo, 1.0)
        q = obj.segment_query(i)
        return grad_step_alpha(q.b, q.c, obj.L, lo, 1.0)
    return obj.line_search(i, lo, 1.0, tol=cfg.ls_tol, max_iter=cfg.ls_max_iter)


def _drive(obj, poly, cfg, away, nnz_fn=None, inner_callback=None):
    poly = poly if poly is not None else obj.poly
    if poly is not obj.poly:
        raise ValueError("objective is bound to a different polytope")
    M = poly.M
    order = _resolve_order(M, cfg.visit_order)

    if away:
        if cfg.lam0 is not None:
            lam = np.array(cfg.lam0, dtype=np.float64)
            if lam.shape != (M,) or lam.min() < 0 or abs(lam.sum() - 1.0) > 1e-10:
                raise ValueError("lam0 must be a point of the weight simplex")
            obj.reset(poly.combination(lam))
        else:
            lam = np.zeros(M)
            lam[cfg.start_vertex] = 1.0
            obj.reset(poly.vertex(cfg.start_vertex))
        state = AwayState(lam=lam)
    else:
        lam = np.empty(0)
        state = None
        obj.reset(cfg.x0 if cfg.x0 is not None else poly.vertex(cfg.start_vertex))

    needs_per_step = (inner_callback is not None or cfg.skip_zero_weight
                      or cfg.directional_curvature)
    kname = obj.kernel_name()
    use_kernels = cfg.use_kernels
    if use_kernels is None:
        use_kernels = kname is not None and not needs_per_step
    if use_kernels and kname is None:
        raise ValueError("no compiled cycle kernel for this objective/polytope")
    if use_kernels and needs_per_step:
        raise ValueError("this configuration needs the per-step path "
                         "(use_kernels=False)")
    fn = _kernels.kernel(kname) if use_kernels else None
    grad_rule = cfg.step_rule == GRAD_1D
    nnz = nnz_fn if nnz_fn is not None else (lambda x: _count_nnz(x, cfg.nnz_tol))

    t_start = time.perf_counter()
    trace = [TraceRecord(0, obj.eval(), time.perf_counter() - t_start, 0, nnz(obj.x))]
    inner_total = 0

    for t in range(1, cfg.max_outer + 1):
        if use_kernels:
            obj.run_cycle(fn, order, lam, grad_rule, away,
                          cfg.gamma_cap, cfg.drop_tol, cfg.ls_tol, cfg.ls_max_iter)
        else:
            for i in order:
                if obj.segment_is_degenerate(i):
                    if inner_callback is not None:
                        inner_callback(t, int(i), 0.0)
                    continue
                if (away and cfg.skip_zero_weight and lam[i] == 0.0
                        and obj.segment_query(i).b >= 0.0):
                    if inner_callback is not None:
                        inner_callback(t, int(i), 0.0)
                    continue
                lo = 0.0
                capped = False
                if away:
                    li = lam[i]
                    if li >= 1.0:
                        lo = -cfg.gamma_cap
                        capped = True
                    else:
                        gma = li / (1.0 - li)
                        if gma > cfg.gamma_cap:
                            gma = cfg.gamma_cap
                            capped = True
                        lo = -gma
                alpha = _inner_step(obj, i, lo, cfg)
                dropped = False
                if away and not capped and abs(alpha - lo) <= cfg.drop_tol * max(1.0, -lo):
                    alpha = lo
                    dropped = True
                obj.apply_step(i, alpha)
                if away:
                    lam *= 1.0 - alpha
                    if dropped:
                        lam[i] = 0.0
                    else:
                        lam[i] += alpha
                if inner_callback is not None:
                    inner_callback(t, int(i), float(alpha))
        inner_total += M
        if away:
            weight_refresh(state, obj.x, poly, tol=1e-8)

        f_now = obj.eval()
        trace.append(TraceRecord(t, f_now, time.perf_counter() - t_start,
                                 inner_total, nnz(obj.x)))
        f_prev = trace[-2].f_value
        if (f_prev - f_now) / max(abs(f_prev), 1.0) < cfg.rel_improve_tol:
            break

    x = obj.x.copy()
    if away:
        return x, state, trace
    return x, trace


def polycd_solve(obj, poly=None, cfg=None, nnz_fn=None, inner_callback=None):
    """Cyclic vertex descent with steps in [0, 1].

    Returns (x, trace); the trace holds one record per outer iteration
    boundary, record 0 being the start point.
    """
    cfg = cfg if cfg is not None else SolveConfig()
    return _drive(obj, poly, cfg, away=False, nnz_fn=nnz_fn,
                  inner_callback=inner_callback)


def polycdwa_solve(obj, poly=None, cfg=None, nnz_fn=None, inner_callback=None):
    """Cyclic vertex descent with away steps: steps in [-gamma_i, 1] and
    exact weight maintenance (a step hitting -gamma_i writes the weight as
    an exact zero).

    Returns (x, away_state, trace).
    """
    cfg = cfg if cfg is not None else SolveConfig()
    return _drive(obj, poly, cfg, away=True, nnz_fn=nnz_fn,
                  inner_callback=inner_callback)


# ---------------------------------------------------------------------------
# empirical rate-bound checks
# ---------------------------------------------------------------------------


@dataclass
class BoundReport:
    ok: bool
    ts: np.ndarray
    gaps: np.ndarray
    bounds: np.ndarray
    first_violation: int | None = None

    @property
    def margins(self):
        return self.bounds - self.gaps


def _slack(f_star):
    return 1e-12 * max(1.0, abs(f_star))


def check_sublinear_bound(trace, f_star, M, L, D, rule):
    """Check gap(t) <= max(gap(1), K M L D^2) / t for t >= 1, with K = 4
    under exact line search and K = 16 under the 1D gradient rule."""
    K = 4.0 if rule == LINE_SEARCH else 16.0
    recs = [r for r in trace if r.t >= 1]
    if not recs:
        raise ValueError("trace has no records with t >= 1")
    gap1 = trace[1].f_value - f_star if trace[0].t == 0 else recs[0].f_value - f_star
    const = max(gap1, K * M * L * D * D)
    ts = np.array([r.t for r in recs])
    gaps = np.array([r.f_value - f_star for r in recs])
    bounds = const / ts
    viol = gaps > bounds * (1.0 + 1e-9) + _slack(f_star)
    first = int(ts[viol][0]) if viol.any() else None
    return BoundReport(ok=not viol.any(), ts=ts, gaps=gaps, bounds=bounds,
                       first_violation=first)


def check_linear_bound(trace, f_star, M, L, D, mu, psi, rule):
    """Check gap(t) <= (G/(1+G))^t gap(0) with G = 1 + 9 M L D^2/(mu psi^2)
    under exact line search, and the G' = 2 + 16 M L D^2/(mu psi^2) analogue
    under the 1D gradient rule."""
    if not (mu > 0 and psi > 0):
        raise ValueError("needs mu > 0 and psi > 0")
    base = M * L * D * D / (mu * psi * psi)
    G = 1.0 + 9.0 * base if rule == LINE_SEARCH else 2.0 + 16.0 * base
    rho = G / (1.0 + G)
    if trace[0].t != 0:
        raise ValueError("trace must start at t = 0")
    gap0 = trace[0].f_value - f_star
    ts = np.array([r.t for r in trace])
    gaps = np.array([r.f_value - f_star for r in trace])
    bounds = gap0 * rho ** ts
    viol = gaps > bounds * (1.0 + 1e-9) + _slack(f_star)
    first = int(ts[viol][0]) if viol.any() else None
    return BoundReport(ok=not viol.any(), ts=ts, gaps=gaps, bounds=bounds,
                       first_violation=first)
