"""Independent oracles and property checkers.

Everything here recomputes from first principles (stateless evaluations,
dense matrices, exhaustive grids) so the incremental-cache solver path is
never on both sides of a comparison.  The module also packages executable
forms of the supporting algebraic identities behind the convergence rates,
used both on synthetic sequences and on real solver traces.
"""

from dataclasses import dataclass
import itertools

import numpy as np

from .baselines import BaselineConfig, afw_solve
from .objectives import KdeHuber
from .polytope import L1Ball, StandardSimplex, project_simplex


def finite_diff_gradient(obj, x, h=1e-5):
    """Central finite differences of obj.eval_at around x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for k in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        g[k] = (obj.eval_at(xp) - obj.eval_at(xm)) / (2.0 * h)
    return g


def golden_section_min(g, lo, hi, tol=1e-8, max_iter=500):
    """Golden-section search on a unimodal function; test oracle for the
    derivative-bisection line searches."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = g(c), g(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g(d)
        it += 1
    return 0.5 * (a + b)


def grid_line_min(g, lo, hi, levels=3, pts=100):
    """Multilevel grid minimizer of a 1D convex function; each level zooms
    into the bracket around the best grid point, leaving a final bracket of
    width (hi-lo) * (2/pts)**levels around the minimizer."""
    a, b = lo, hi
    for _ in range(levels):
        alphas = np.linspace(a, b, pts + 1)
        vals = np.array([g(al) for al in alphas])
        k = int(np.argmin(vals))
        a = alphas[max(k - 1, 0)]
        b = alphas[min(k + 1, pts)]
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# high-accuracy reference solutions
# ---------------------------------------------------------------------------


@dataclass
class RefSolution:
    x: np.ndarray
    f: float
    residual: float  # final projected-gradient residual (relative)
    fw_gap: float    # linearization certificate: upper bound on f(x) - f*
    iterations: int
    converged: bool


def certify_fw_gap(obj, poly, x):
    """max_v <grad f(x), x - v> over the vertices: a computable upper bound
    on the optimality gap of x."""
    g = obj.grad_at(x)
    scores = poly.vertex_scores(g)
    return float(g @ x - scores.min())


def reference_solve(obj, poly=None, tol=1e-12, max_iter=1_000_000,
                    grid_check=None):
    """Projected gradient with fixed step 1/L run to a small relative
    residual; the returned certificate bounds the remaining gap.  For tiny
    ambient dimensions the result is additionally cross-checked against an
    exhaustive refined grid (on by default where supported).
    """
    poly = poly if poly is not None else obj.poly
    L = obj.L
    x = poly.project(poly.vertex(0))
    res = np.inf
    k = 0
    while k < max_iter:
        x_new = poly.project(x - obj.grad_at(x) / L)
        res = np.linalg.norm(x_new - x) / max(1.0, np.linalg.norm(x))
        x = x_new
        k += 1
        if res <= tol:
            break
    f = float(obj.eval_at(x))
    if grid_check is None:
        grid_check = ((isinstance(poly, StandardSimplex) and poly.d <= 3)
                      or (isinstance(poly, L1Ball) and poly.d <= 2))
    if grid_check:
        f_grid = grid_search_min(obj, poly)
        # the grid never beats a converged reference by more than its resolution
        if f_grid < f - 1e-6 * max(1.0, abs(f)):
            raise AssertionError(
                f"grid search found a better point: {f_grid} < {f}")
    return RefSolution(x=x, f=f, residual=float(res),
                       fw_gap=certify_fw_gap(obj, poly, x),
                       iterations=k, converged=res <= tol)


def _simplex_grid(d, k):
    """Barycentric grid with denominator k on the (d-1)-simplex, d <= 3."""
    if d == 1:
        return np.array([[1.0]])
    if d == 2:
        a = np.arange(k + 1)
        return np.stack([a, k - a], axis=1) / k
    if d == 3:
        pts = [(a, b, k - a - b)
               for a in range(k + 1) for b in range(k + 1 - a)]
        return np.array(pts, dtype=np.float64) / k
    raise ValueError("grid cross-check supports simplex dimension <= 3")


def grid_search_min(obj, poly, base=40, refine=8, levels=2):
    """Coarse grid over the polytope followed by local refinements around
    the incumbent; a sanity cross-check for tiny instances, not a precision
    oracle."""
    if isinstance(poly, StandardSimplex) and poly.d <= 3:
        pts = _simplex_grid(poly.d, base)
    elif isinstance(poly, L1Ball) and poly.d <= 2:
        r = poly.radius
        if poly.d == 1:
            pts = np.linspace(-r, r, 2 * base + 1)[:, None]
        else:
            g = np.linspace(-r, r, 2 * base + 1)
            xx, yy = np.meshgrid(g, g)
            pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
            pts = pts[np.abs(pts).sum(axis=1) <= r + 1e-12]
    else:
        raise ValueError("grid cross-check supports tiny simplex/l1-ball only")
    vals = np.array([obj.eval_at(p) for p in pts])
    best = pts[int(np.argmin(vals))]
    f_best = float(vals.min())
    step = poly.diameter() / base
    for _ in range(levels):
        step /= refine
        offsets = np.array(list(itertools.product((-4, -3, -2, -1, 0, 1, 2, 3, 4),
                                                  repeat=poly.d)), dtype=np.float64)
        cand = best[None, :] + step * offsets
        cand = np.stack([poly.project(c) for c in cand])
        vals = np.array([obj.eval_at(c) for c in cand])
        k = int(np.argmin(vals))
        if vals[k] < f_best:
            f_best = float(vals[k])
            best = cand[k]
    return f_best


class DenseKdeHuber(KdeHuber):
    """Kernel-weight objective with the kernel matrix held densely.

    Oracle-only twin of the production objective: the production class
    recomputes kernel columns on demand, this one materializes K once, so
    comparing the two exercises genuinely different code paths (and the
    dense matvec makes long reference runs affordable)."""

    def __init__(self, points, bandwidth, huber_mu, poly=None, x0=None, L=None):
        X = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
        xsq = np.sum(X * X, axis=1)
        dim = X.shape[1]
        kappa0 = float((2.0 * np.pi * bandwidth ** 2) ** (-dim / 2.0))
        sq = np.maximum(xsq[:, None] - 2.0 * (X @ X.T) + xsq[None, :], 0.0)
        self._K = kappa0 * np.exp(-sq / (2.0 * bandwidth ** 2))
        super().__init__(points, bandwidth, huber_mu, poly=poly, x0=x0, L=L)

    def matvec(self, v, block=512):
        return self._K @ np.asarray(v, dtype=np.float64)

    def kernel_column(self, j):
        return self._K[:, j].copy()

    def kernel_name(self):
        return None  # oracle path stays off the compiled kernels


def reference_solve_kde(points, bandwidth, huber_mu, afw_iters=800,
                        rounds=40, cert_tol=1e-9, grow=16,
                        time_budget=None):
    """Certified reference for the density objective.

    Fixed-step projected gradient stalls on this family (its certified
    smoothness bound is enormous), so the reference combines three
    independent pieces on a dense-matrix twin of the objective: away-step
    Frank-Wolfe to localize the active vertex set, a damped Newton solve
    over the weights of that set (the restricted Hessian has an explicit
    low-structure form) to pin the face, and corrective rounds that admit
    the worst linearization vertices until the Frank-Wolfe certificate
    bounds the remaining gap below cert_tol (relative), the round cap, or
    the wall-clock budget.  The certificate ships with the solution, so
    callers can score against the certified interval [f - fw_gap, f]
    rather than trusting f blindly."""
    import time as _time

    t_start = _time.perf_counter()

    obj = DenseKdeHuber(points, bandwidth, huber_mu)
    poly = obj.poly
    n = obj.n
    K = obj._K
    kappa0 = obj.kappa0
    mu = obj.mu_h

    cfg = BaselineConfig(max_iter=afw_iters, window=50, window_tol=1e-13,
                         fw_gap_tol=0.0)
    x, trace = afw_solve(obj, poly, cfg)
    support = list(np.flatnonzero(x > 1e-12))
    if not support:
        support = [int(np.argmax(x))]

    def face_newton(support, lam, iters=30):
        """Damped Newton on the face conv{e_j : j in support}, keeping the
        iterate on the simplex via projection inside the backtracking."""
        KS = K[:, support]
        KSS = KS[support, :]

        def pieces(lam):
            u = KS @ lam
            q = float(lam @ (KSS @ lam))
            t = np.sqrt(np.maximum(q - 2.0 * u + kappa0, 0.0))
            ratio = np.minimum(1.0, mu / np.maximum(t, 1e-300))
            f = float(np.where(t <= mu, 0.5 * t * t,
                               mu * t - 0.5 * mu * mu).sum())
            return u, t, ratio, f

        u, t, ratio, f = pieces(lam)
        k = len(support)
        newton_steps = 0
        for _ in range(iters):
            g = float(ratio.sum()) * u[support] - KS.T @ ratio
            # Hessian of the restricted objective: sum_i c1_i K_SS minus the
            # rank-one Huber corrections on the far terms
            far = t > mu
            c2 = np.where(far, mu / np.maximum(t, 1e-300) ** 3, 0.0)
            Y = u[support][None, :] - KS  # row i = (K(w - e_i)) on the face
            H = float(ratio.sum()) * KSS - (Y * c2[:, None]).T @ Y
            Hreg = H + (1e-12 * max(1.0, float(np.abs(H).max()))) * np.eye(k)
            M = np.zeros((k + 1, k + 1))
            M[:k, :k] = Hreg
            M[:k, k] = 1.0
            M[k, :k] = 1.0
            rhs = np.concatenate([-g, [0.0]])
            try:
                delta = np.linalg.solve(M, rhs)[:k]
            except np.linalg.LinAlgError:
                break
            step = 1.0
            improved = False
            for _ in range(40):
                lam_new = project_simplex(lam + step * delta)
                u2, t2, ratio2, f2 = pieces(lam_new)
                if f2 < f - 1e-16 * max(1.0, abs(f)):
                    lam, u, t, ratio, f = lam_new, u2, t2, ratio2, f2
                    improved = True
                    break
                step *= 0.5
            newton_steps += 1
            if not improved:
                break
        return lam, f, newton_steps

    def face_slsqp(support, lam0, maxiter=80):
        from scipy.optimize import minimize

        KS = K[:, support]
        KSS = KS[support, :]

        def fun_jac(lam):
            u = KS @ lam
            q = float(lam @ (KSS @ lam))
            t = np.sqrt(np.maximum(q - 2.0 * u + kappa0, 0.0))
            ratio = np.minimum(1.0, mu / np.maximum(t, 1e-300))
            f = float(np.where(t <= mu, 0.5 * t * t,
                               mu * t - 0.5 * mu * mu).sum())
            return f, float(ratio.sum()) * u[support] - KS.T @ ratio

        res = minimize(fun_jac, lam0, jac=True, method="SLSQP",
                       bounds=[(0.0, 1.0)] * len(support),
                       constraints=[{"type": "eq",
                                     "fun": lambda l: l.sum() - 1.0,
                                     "jac": lambda l: np.ones_like(l)}],
                       options={"maxiter": maxiter, "ftol": 1e-14})
        lam = np.maximum(res.x, 0.0)
        lam /= lam.sum()
        return lam, int(res.nit)

    total_iters = trace[-1].t
    cert = np.inf
    w = x
    f = float(obj.eval_at(w))
    for _ in range(rounds):
        k = len(support)
        lam0 = np.maximum(w[support], 0.0)
        lam0 = lam0 / lam0.sum() if lam0.sum() > 0 else np.full(k, 1.0 / k)
        # cheap curvature pre-polish, then the active-set finisher
        lam, f, nit = face_newton(support, lam0)
        lam, nit2 = face_slsqp(support, lam)
        w = np.zeros(n)
        w[support] = lam
        f = float(obj.eval_at(w))
        total_iters += nit + nit2
        g = obj.grad_at(w)
        cert = float(g @ w - g.min())
        if cert <= cert_tol * max(abs(f), 1.0):
            break
        if time_budget is not None and _time.perf_counter() - t_start > time_budget:
            break
        worst = np.argsort(g)[:grow]
        support = sorted(set(np.flatnonzero(w > 1e-14)) | set(int(v) for v in worst))
    return RefSolution(x=w, f=f, residual=np.nan,
                       fw_gap=cert, iterations=total_iters,
                       converged=cert <= cert_tol * max(abs(f), 1.0))


# ---------------------------------------------------------------------------
# executable algebraic identities
# ---------------------------------------------------------------------------


def simplex_decompose(a, b, tol=1e-12):
    """Split a - b into (eta/2)(p - q) with p, q on the simplex and
    supp(p) inside supp(a); eta = ||a - b||_1.  Returns (p, q, eta)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    for name, v in (("a", a), ("b", b)):
        if v.min() < -tol or abs(v.sum() - 1.0) > tol:
            raise ValueError(f"{name} is not on the simplex (tol {tol})")
    diff = a - b
    eta = float(np.abs(diff).sum())
    if eta == 0.0:
        return a.copy(), a.copy(), 0.0
    p = 2.0 * np.maximum(diff, 0.0) / eta
    q = 2.0 * np.maximum(-diff, 0.0) / eta
    return p, q, eta


@dataclass
class SequenceLemmaResult:
    status: str  # "ok" | "premise" | "conclusion"
    index: int | None = None
    detail: str = ""

    def __bool__(self):
        return self.status == "ok"


def check_sequence_lemma(seq, lam, rtol=1e-9):
    """For a positive decreasing sequence with a_k - a_{k+1} >= lam a_{k+1}^2,
    verify a_k <= max(a_1, 2/lam) / k.  Premise violations are reported
    separately from conclusion violations so proof-machinery regressions are
    distinguishable from implementation bugs."""
    a = np.asarray(seq, dtype=np.float64)
    if a.size == 0:
        raise ValueError("empty sequence")
    slack = rtol * max(abs(a[0]), 1.0)
    if np.any(a <= 0.0):
        k = int(np.argmax(a <= 0.0))
        return SequenceLemmaResult("premise", k, f"a[{k}] = {a[k]} not positive")
    for k in range(a.size - 1):
        if a[k + 1] > a[k] + slack:
            return SequenceLemmaResult("premise", k, "not decreasing")
        if a[k] - a[k + 1] < lam * a[k + 1] ** 2 - slack:
            return SequenceLemmaResult(
                "premise", k,
                f"recursion fails: drop {a[k] - a[k+1]:.3e} < "
                f"lam*a^2 {lam * a[k+1]**2:.3e}")
    c = max(a[0], 2.0 / lam)
    for k in range(a.size):
        if a[k] > c / (k + 1) * (1.0 + rtol) + slack:
            return SequenceLemmaResult("conclusion", k,
                                       f"a[{k}] = {a[k]} > {c / (k + 1)}")
    return SequenceLemmaResult("ok")


def reduction_sequences_from_steps(obj, poly, steps, rng):
    """Drive the objective through random feasible vertex steps, collecting
    the iterate and stateless-gradient sequences the telescoping identities
    quantify over."""
    xs = [obj.x.copy()]
    gs = [obj.grad_at(obj.x)]
    for _ in range(steps):
        i = int(rng.integers(poly.M))
        alpha = float(rng.random())
        obj.apply_step(i, alpha)
        xs.append(obj.x.copy())
        gs.append(obj.grad_at(obj.x))
    return gs, xs


def check_reduction_identity(grad_seq, x_seq, z):
    """Evaluate both telescoping identities on the given gradient/iterate
    sequences for every index pair and return the largest absolute
    discrepancy between their two sides."""
    G = [np.asarray(g, dtype=np.float64) for g in grad_seq]
    X = [np.asarray(x, dtype=np.float64) for x in x_seq]
    if len(G) != len(X):
        raise ValueError("gradient and iterate sequences differ in length")
    z = np.asarray(z, dtype=np.float64)
    K = len(X) - 1
    worst = 0.0
    for i in range(K):
        for j in range(i + 1, K + 1):
            lhs = float(G[j] @ (X[j] - z)) - float(G[i] @ (X[i] - z))
            rhs = sum(float(G[k] @ (X[k] - X[k - 1]))
                      + float((G[k] - G[k - 1]) @ (X[k - 1] - z))
                      for k in range(i + 1, j + 1))
            worst = max(worst, abs(lhs - rhs))
            if i >= 1:
                lhs2 = float(G[j] @ (X[j] - z)) - float(G[i - 1] @ (X[i] - z))
                rhs2 = (sum(float(G[k - 1] @ (X[k] - X[k - 1]))
                            for k in range(i + 1, j + 1))
                        + sum(float((G[k] - G[k - 1]) @ (X[k] - z))
                              for k in range(i, j + 1)))
                worst = max(worst, abs(lhs2 - rhs2))
    return worst


# ---------------------------------------------------------------------------
# pass/fail property report (the CLI `verify` subcommand)
# ---------------------------------------------------------------------------


def run_verification(verbose=True, seed=0):
    """Run a condensed property suite and return [(name, ok, detail), ...].

    The pytest suite is the authoritative gate; this is the quick in-process
    report for installed copies.
    """
    from . import _kernels
    from .objectives import (LeastSquares, Logistic, Quadratic,
                             grad_step_alpha)
    from .problems import LassoSpec, LogisticSpec, gen_lasso, gen_logistic
    from .solvers import (GRAD_1D, LINE_SEARCH, SolveConfig,
                          check_linear_bound, check_sublinear_bound,
                          polycd_solve, polycdwa_solve)
    from .baselines import fista_solve

    rng = np.random.default_rng(seed)
    checks = []

    def record(name, ok, detail=""):
        checks.append((name, bool(ok), detail))
        if verbose:
            mark = "PASS" if ok else "FAIL"
            extra = f"  ({detail})" if detail else ""
            print(f"[{mark}] {name}{extra}")

    # projections satisfy the variational inequality against the vertices
    ok = True
    for _ in range(20):
        y = rng.standard_normal(8) * 3
        p = project_simplex(y)
        ok &= p.min() >= -1e-12 and abs(p.sum() - 1) <= 1e-10
        ok &= all((y - p) @ (np.eye(8)[i] - p) <= 1e-9 for i in range(8))
    record("simplex projection optimality", ok)

    # facial distances on tiny sets against the exhaustive split oracle
    def simplex_psi_oracle(M):
        return min(np.sqrt(1.0 / k + 1.0 / (M - k)) for k in range(1, M))

    ok = True
    for dd in (2, 3, 4):
        got = StandardSimplex(dd).facial_distance()
        ok &= abs(got - simplex_psi_oracle(dd)) <= 1e-8
    record("facial distance (simplex 2..4)", ok)

    # finite-difference gradients
    spec = LassoSpec(n=40, d=15, r=4, snr=2.0, seed=seed)
    A, b, _, C = gen_lasso(spec)
    ball = L1Ball(15, C)
    ls = LeastSquares(A, b, ball)
    x = ball.project(rng.standard_normal(15))
    g = ls.grad_at(x)
    fd = finite_diff_gradient(ls, x)
    record("least-squares gradient vs finite differences",
           np.linalg.norm(g - fd) <= 1e-4 * max(1.0, np.linalg.norm(g)))

    lspec = LogisticSpec(n=40, d=15, r=4, seed=seed)
    A2, labs, _, C2 = gen_logistic(lspec)
    lg = Logistic(A2, labs, L1Ball(15, C2))
    g = lg.grad_at(x)
    fd = finite_diff_gradient(lg, x)
    record("logistic gradient vs finite differences",
           np.linalg.norm(g - fd) <= 1e-4 * max(1.0, np.linalg.norm(g)))

    pts = rng.standard_normal((30, 2)) * 2
    kde = KdeHuber(pts, 1.0, 0.4)
    w = project_simplex(rng.random(30))
    g = kde.grad_at(w)
    fd = finite_diff_gradient(kde, w)
    record("kde gradient vs finite differences",
           np.linalg.norm(g - fd) <= 1e-3 * max(1.0, np.linalg.norm(g)))

    # bisection line search against the golden-section oracle
    lg.reset(lg.poly.vertex(2))
    ok = True
    for i in (0, 3, 7):
        a_bis = lg.line_search(i, 0.0, 1.0)
        x0 = lg.x.copy()
        v = lg.poly.vertex(i)
        a_gold = golden_section_min(lambda a: lg.eval_at(x0 + a * (v - x0)),
                                    0.0, 1.0, tol=1e-10)
        ok &= abs(a_bis - a_gold) <= 1e-7
    record("derivative bisection vs golden section", ok)

    # 1D gradient rule against a grid oracle on its own model
    ok = True
    for _ in range(30):
        bq = rng.standard_normal() * 4
        cq = abs(rng.standard_normal()) + 0.1
        Lq = abs(rng.standard_normal()) + 0.5
        a_rule = grad_step_alpha(bq, cq, Lq, 0.0, 1.0)
        a_grid = grid_line_min(lambda a: a * bq + 0.5 * Lq * a * a * cq,
                               0.0, 1.0, levels=4)
        ok &= abs(a_rule - a_grid) <= 1e-6
    record("1D gradient rule vs grid oracle", ok)

    # simplex decomposition identity
    ok = True
    for _ in range(200):
        aa = project_simplex(rng.standard_normal(6))
        bb = project_simplex(rng.standard_normal(6))
        p, q, eta = simplex_decompose(aa, bb)
        ok &= np.max(np.abs((aa - bb) - 0.5 * eta * (p - q))) <= 1e-14
        ok &= set(np.flatnonzero(p > 0)) <= set(np.flatnonzero(aa > 0))
    record("simplex vector decomposition", ok)

    # sequence recursion bound: holds on 1/k, premise failure detected
    good = check_sequence_lemma([1.0 / k for k in range(1, 200)], 1.0)
    bad = check_sequence_lemma([1.0, 1.0, 1.0], 1.0)
    record("sequence recursion lemma checker",
           good.status == "ok" and bad.status == "premise")

    # telescoping identities on random quadratic sequences
    simplex4 = StandardSimplex(4)
    Braw = rng.standard_normal((6, 4))
    quad = Quadratic(Braw.T @ Braw, rng.standard_normal(4), poly=simplex4)
    gs, xs = reduction_sequences_from_steps(quad, simplex4, 5, rng)
    err = check_reduction_identity(gs, xs, simplex4.vertex(0))
    record("telescoping reduction identities", err <= 1e-10, f"err={err:.2e}")

    # sublinear rate bound on random convex quadratics
    ok = True
    for trial in range(4):
        M = 5
        Braw = rng.standard_normal((3, M))
        Q = Braw.T @ Braw  # rank-deficient: convex but not strongly
        quad = Quadratic(Q, rng.standard_normal(M), poly=StandardSimplex(M))
        ref = reference_solve(quad, tol=1e-13, max_iter=300_000)
        D = StandardSimplex(M).diameter()
        for rule in (LINE_SEARCH, GRAD_1D):
            quad.reset()
            _, tr = polycd_solve(quad, None,
                                 SolveConfig(step_rule=rule, max_outer=40,
                                             rel_improve_tol=0.0))
            rep = check_sublinear_bound(tr, ref.f, M, quad.L, D, rule)
            ok &= rep.ok
    record("sublinear rate bound suite (sample)", ok)

    # linear rate bound on strongly convex quadratics
    ok = True
    psi3 = StandardSimplex(3).facial_distance()
    for trial in range(3):
        Braw = rng.standard_normal((6, 3))
        Q = Braw.T @ Braw + 0.5 * np.eye(3)
        quad = Quadratic(Q, rng.standard_normal(3), poly=StandardSimplex(3))
        ref = reference_solve(quad, tol=1e-13, max_iter=300_000)
        D = StandardSimplex(3).diameter()
        for rule in (LINE_SEARCH, GRAD_1D):
            quad.reset()
            _, _, tr = polycdwa_solve(quad, None,
                                      SolveConfig(step_rule=rule, max_outer=40,
                                                  rel_improve_tol=0.0))
            rep = check_linear_bound(tr, ref.f, 3, quad.L, D, quad.mu, psi3, rule)
            ok &= rep.ok
    record("linear rate bound suite (sample)", ok)

    # backend agreement on a small instance
    if _kernels.HAVE_NUMBA:
        spec = LassoSpec(n=60, d=25, r=5, snr=1.0, seed=seed + 7)
        A, b, _, C = gen_lasso(spec)
        ballc = L1Ball(25, C)
        fvals = {}
        prev = _kernels.active_backend()
        try:
            for backend in ("numpy", "numba"):
                _kernels.use_backend(backend)
                o = LeastSquares(A, b, ballc)
                _, _, tr = polycdwa_solve(
                    o, ballc, SolveConfig(max_outer=15, rel_improve_tol=0.0))
                fvals[backend] = np.array([r.f_value for r in tr])
        finally:
            _kernels.use_backend(prev)
        dev = np.max(np.abs(fvals["numpy"] - fvals["numba"])
                     / np.maximum(np.abs(fvals["numpy"]), 1.0))
        record("numba/numpy backend agreement", dev <= 1e-9, f"rel dev={dev:.2e}")

    # small cross-solver consistency probe
    spec = LassoSpec(n=60, d=30, r=5, snr=1.0, seed=seed + 1)
    A, b, _, C = gen_lasso(spec)
    ballc = L1Ball(30, C)
    f_hats = []
    o = LeastSquares(A, b, ballc)
    _, _, tr = polycdwa_solve(o, ballc, SolveConfig(max_outer=200,
                                                    rel_improve_tol=1e-14))
    f_hats.append(min(r.f_value for r in tr))
    o = LeastSquares(A, b, ballc)
    _, tr = fista_solve(o, ballc, BaselineConfig(max_iter=4000, window=200,
                                                 window_tol=1e-14))
    f_hats.append(min(r.f_value for r in tr))
    f_star = min(f_hats)
    dev = max((f - f_star) / max(abs(f_star), 1.0) for f in f_hats)
    record("cross-solver agreement (small instance)", dev <= 1e-6,
           f"max rel gap={dev:.2e}")

    return checks
