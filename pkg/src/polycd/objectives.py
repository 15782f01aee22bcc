"""Smooth convex objectives bound to a polytope iterate, with cached state
so that a segment query toward any vertex costs O(n + d).

Every objective keeps its iterate ``x`` plus objective-specific caches (the
product A x for the composite losses, the kernel products for the density
objective) that are updated incrementally by ``apply_step`` and rebuilt from
scratch every ``refresh_every`` steps to keep floating-point drift bounded.
``eval_at``/``grad_at`` are stateless recomputations used by the oracles, so
they share no code path with the incremental caches.
"""

from dataclasses import dataclass

import numpy as np

from .polytope import StandardSimplex


class CacheConsistencyError(RuntimeError):
    pass


@dataclass
class SegmentQuery:
    """Directional data for a step toward one vertex: b = <grad f(x), v - x>
    and c = ||v - x||^2."""

    b: float
    c: float


def grad_step_alpha(b, c, L, lo, hi):
    """Minimizer of alpha*b + (L/2) * alpha^2 * c over [lo, hi].

    Degenerate segment (c = 0): the model is linear, so the minimizer sits
    at the boundary pointed to by the sign of b (lo when b >= 0, hi
    otherwise).
    """
    if hi < lo:
        raise ValueError(f"empty step interval [{lo}, {hi}]")
    if c <= 0.0:
        return lo if b >= 0.0 else hi
    return min(max(-b / (L * c), lo), hi)


def bisect_line_min(dphi, lo, hi, tol=1e-12, max_iter=200):
    """Minimize a convex 1D function on [lo, hi] by bisecting the sign of
    its derivative.  Flat stretches resolve to the smallest minimizer."""
    if hi < lo:
        raise ValueError(f"empty step interval [{lo}, {hi}]")
    if dphi(lo) >= 0.0:
        return lo
    if dphi(hi) <= 0.0:
        return hi
    a, b = lo, hi
    it = 0
    while b - a > tol and it < max_iter:
        mid = 0.5 * (a + b)
        if dphi(mid) >= 0.0:
            b = mid
        else:
            a = mid
        it += 1
    return 0.5 * (a + b)


def _power_sigma_sq(matvec, rmatvec, dim, iters=100, seed=0):
    """Largest eigenvalue of A'A via power iteration (A given as matvec pair)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = rmatvec(matvec(v))
        nw = np.linalg.norm(w)
        if nw <= 0.0:
            return 0.0
        v = w / nw
        est = nw
    return float(est)


class BoundObjective:
    """Shared iterate/cache bookkeeping for all objective families."""

    refresh_every = 1000

    def _init_state(self, poly, x0):
        self.poly = poly
        self._steps = 0
        self._last_refresh = 0
        self.reset(x0)

    def reset(self, x0=None):
        if x0 is None:
            x0 = self.poly.vertex(0)
        self.x = np.array(x0, dtype=np.float64)
        if self.x.shape != (self.poly.d,):
            raise ValueError("start point dimension mismatch")
        self._steps = 0
        self._last_refresh = 0
        self.refresh_cache()

    def refresh_cache(self):
        raise NotImplementedError

    def _bump(self, k=1):
        self._steps += k
        if self.refresh_every and self._steps - self._last_refresh >= self.refresh_every:
            self.refresh_cache()
            self._last_refresh = self._steps

    @property
    def steps_applied(self):
        return self._steps

    def segment_query_directional(self, i):
        """(b, curvature, L) for the directional-curvature step variant;
        falls back to the global-L model where the loss has no composite
        structure to exploit."""
        q = self.segment_query(i)
        return q.b, q.c, self.L

    # kernel hooks; overridden where a compiled cycle kernel exists
    def kernel_name(self):
        return None

    def run_cycle(self, fn, order, lam, grad_rule, away,
                  gamma_cap, drop_tol, ls_tol, ls_max_iter):
        raise NotImplementedError


class _CompositeObjective(BoundObjective):
    """g(A x) losses: caches z = A x and ||x||^2 for O(n + d) steps."""

    def __init__(self, A, poly, x0=None):
        A = np.ascontiguousarray(A, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("A must be 2-dimensional")
        if A.shape[1] != poly.d:
            raise ValueError(
                f"objective/polytope dimension mismatch: A has {A.shape[1]} "
                f"columns, polytope lives in R^{poly.d}")
        self.A = A
        self.A_cols = np.ascontiguousarray(A.T)
        self.n, self.d = A.shape
        if poly.structured:
            self._pv_cols = None
        else:
            # effective data column per listed vertex, A v_i
            self._pv_cols = np.ascontiguousarray((A @ poly.vertex_matrix().T).T)
        self._init_state(poly, x0)

    def refresh_cache(self):
        self.z = self.A @ self.x
        self.sq_x = float(self.x @ self.x)

    def _col_scale(self, i):
        if self._pv_cols is None:
            return self.A_cols[self.poly.vertex_coords[i]], self.poly.vertex_scales[i]
        return self._pv_cols[i], 1.0

    def _c_val(self, i):
        if self._pv_cols is None:
            j = self.poly.vertex_coords[i]
            s = self.poly.vertex_scales[i]
            c = self.sq_x - 2.0 * s * self.x[j] + s * s
        else:
            dv = self.poly.vertex(i) - self.x
            c = float(dv @ dv)
        return max(c, 0.0)

    def segment_is_degenerate(self, i, rel=1e-13):
        # v_i coincides with x up to float cancellation; the solvers skip
        # such steps (any step size leaves x unchanged)
        if self._pv_cols is None:
            j = self.poly.vertex_coords[i]
            s = self.poly.vertex_scales[i]
            c = self.sq_x - 2.0 * s * self.x[j] + s * s
            return c <= rel * (self.sq_x + s * s)
        v = self.poly.vertex(i)
        dv = v - self.x
        return float(dv @ dv) <= rel * (self.sq_x + float(v @ v))

    def segment_query(self, i):
        col, s = self._col_scale(i)
        w = s * col - self.z
        return SegmentQuery(b=self._dir_deriv(w), c=self._c_val(i))

    def segment_query_directional(self, i):
        # curvature measured through the data map: ||A(v - x)||^2 paired
        # with the smoothness of the scalar link g
        col, s = self._col_scale(i)
        w = s * col - self.z
        return self._dir_deriv(w), float(w @ w), self._link_smoothness()

    def apply_step(self, i, alpha):
        if alpha == 0.0:
            self._bump()
            return
        col, s = self._col_scale(i)
        if alpha == 1.0:
            self.z = (s * col) if s != 1.0 else col.copy()
            if self._pv_cols is None:
                j = self.poly.vertex_coords[i]
                self.x[:] = 0.0
                self.x[j] = s
                self.sq_x = s * s
            else:
                self.x = self.poly.vertex(i)
                self.sq_x = float(self.x @ self.x)
        else:
            self.z += alpha * (s * col - self.z)
            if self._pv_cols is None:
                j = self.poly.vertex_coords[i]
                xj = self.x[j]
                self.x *= 1.0 - alpha
                self.x[j] += alpha * s
                self.sq_x = ((1.0 - alpha) ** 2 * self.sq_x
                             + 2.0 * alpha * (1.0 - alpha) * s * xj
                             + alpha * alpha * s * s)
            else:
                v = self.poly.vertex(i)
                self.x += alpha * (v - self.x)
                self.sq_x = float(self.x @ self.x)
        self._bump()

    def full_gradient(self):
        return self.A_cols @ self._resid_grad()

    def grad_at(self, y):
        return self.A.T @ self._resid_grad_at(self.A @ np.asarray(y, dtype=np.float64))

    def eval_at(self, y):
        return self._g_of(self.A @ np.asarray(y, dtype=np.float64))

    def eval(self):
        return self._g_of(self.z)

    # coordinate-pair moves on a simplex domain (used by the 2-coordinate
    # baseline): x <- x + theta * (e_i - e_j)
    def _pair_cols(self, i, j):
        if self._pv_cols is None:
            return (self.A_cols[self.poly.vertex_coords[i]] * self.poly.vertex_scales[i],
                    self.A_cols[self.poly.vertex_coords[j]] * self.poly.vertex_scales[j])
        return self._pv_cols[i], self._pv_cols[j]

    def apply_pair_step(self, i, j, theta):
        if theta == 0.0:
            self._bump()
            return
        ci, cj = self._pair_cols(i, j)
        self.z += theta * (ci - cj)
        xi, xj = self.x[i], self.x[j]
        self.x[i] += theta
        self.x[j] -= theta
        self.sq_x += 2.0 * theta * (xi - xj) + 2.0 * theta * theta
        self._bump()


class LeastSquares(_CompositeObjective):
    """f(x) = ||A x - b||^2 with cached residual products."""

    def __init__(self, A, b, poly, x0=None, L=None):
        self.bvec = np.ascontiguousarray(b, dtype=np.float64)
        super().__init__(A, poly, x0)
        if self.bvec.shape != (self.n,):
            raise ValueError("b must have one entry per row of A")
        self._L_cached = float(L) if L is not None else None

    @property
    def L(self):
        if self._L_cached is None:
            self._L_cached = self.estimate_smoothness()
        return self._L_cached

    def _g_of(self, z):
        r = z - self.bvec
        return float(r @ r)

    def _resid_grad(self):
        return 2.0 * (self.z - self.bvec)

    def _resid_grad_at(self, z):
        return 2.0 * (z - self.bvec)

    def _dir_deriv(self, w):
        return 2.0 * (float(w @ self.z) - float(w @ self.bvec))

    def line_search(self, i, lo, hi, tol=1e-12, max_iter=200):
        """argmin over [lo, hi] of f along the segment toward vertex i;
        closed form for the quadratic loss, lo when the segment is flat."""
        if hi < lo:
            raise ValueError(f"empty step interval [{lo}, {hi}]")
        col, s = self._col_scale(i)
        w = s * col - self.z
        den = float(w @ w)
        if den <= 0.0:
            return lo
        num = float(w @ self.z) - float(w @ self.bvec)
        return min(max(-num / den, lo), hi)

    def pair_line_search(self, i, j, lo, hi):
        ci, cj = self._pair_cols(i, j)
        w = ci - cj
        den = float(w @ w)
        if den <= 0.0:
            return lo
        num = float(w @ self.z) - float(w @ self.bvec)
        return min(max(-num / den, lo), hi)

    def estimate_smoothness(self):
        sig = _power_sigma_sq(lambda v: self.A @ v, lambda w: self.A.T @ w, self.d)
        return max(2.0 * sig * 1.01, 1e-12)

    def _link_smoothness(self):
        return 2.0  # g(z) = ||z - b||^2

    def kernel_name(self):
        return "ls_cycle" if self._pv_cols is None else None

    def run_cycle(self, fn, order, lam, grad_rule, away,
                  gamma_cap, drop_tol, ls_tol, ls_max_iter):
        L = self.L if grad_rule else 1.0
        self.sq_x = fn(self.A_cols, self.bvec, self.z, self.x, lam, order,
                       self.poly.vertex_coords, self.poly.vertex_scales,
                       grad_rule, away, L, self.sq_x, gamma_cap, drop_tol)
        self._bump(len(order))


def _sigmoid_neg(m):
    # 1 / (1 + exp(m)), saturating instead of overflowing
    return 1.0 / (1.0 + np.exp(np.minimum(m, 700.0)))


class Logistic(_CompositeObjective):
    """f(x) = sum_i log(1 + exp(-y_i a_i' x)) with cached margins A x."""

    def __init__(self, A, labels, poly, x0=None, L=None):
        self.labels = np.ascontiguousarray(labels, dtype=np.float64)
        if not np.all(np.abs(self.labels) == 1.0):
            raise ValueError("labels must be +/-1")
        super().__init__(A, poly, x0)
        if self.labels.shape != (self.n,):
            raise ValueError("labels must have one entry per row of A")
        self._L_cached = float(L) if L is not None else None

    @property
    def L(self):
        if self._L_cached is None:
            self._L_cached = self.estimate_smoothness()
        return self._L_cached

    def _g_of(self, z):
        return float(np.logaddexp(0.0, -self.labels * z).sum())

    def _resid_grad(self):
        return self._resid_grad_at(self.z)

    def _resid_grad_at(self, z):
        return -self.labels * _sigmoid_neg(self.labels * z)

    def _dir_deriv(self, w):
        return float(self._resid_grad() @ w)

    def line_search(self, i, lo, hi, tol=1e-12, max_iter=200):
        col, s = self._col_scale(i)
        w = s * col - self.z
        yw = self.labels * w
        ym = self.labels * self.z
        return bisect_line_min(
            lambda a: -float(_sigmoid_neg(ym + a * yw) @ yw), lo, hi,
            tol=tol, max_iter=max_iter)

    def pair_line_search(self, i, j, lo, hi):
        ci, cj = self._pair_cols(i, j)
        w = ci - cj
        yw = self.labels * w
        ym = self.labels * self.z
        return bisect_line_min(
            lambda a: -float(_sigmoid_neg(ym + a * yw) @ yw), lo, hi)

    def estimate_smoothness(self):
        sig = _power_sigma_sq(lambda v: self.A @ v, lambda w: self.A.T @ w, self.d)
        return max(0.25 * sig * 1.01, 1e-12)

    def _link_smoothness(self):
        return 0.25  # scalar logistic loss curvature bound

    def kernel_name(self):
        return "logistic_cycle" if self._pv_cols is None else None

    def run_cycle(self, fn, order, lam, grad_rule, away,
                  gamma_cap, drop_tol, ls_tol, ls_max_iter):
        L = self.L if grad_rule else 1.0
        self.sq_x = fn(self.A_cols, self.labels, self.z, self.x, lam, order,
                       self.poly.vertex_coords, self.poly.vertex_scales,
                       grad_rule, away, L, self.sq_x, gamma_cap, drop_tol,
                       ls_tol, ls_max_iter)
        self._bump(len(order))


def huber(t, mu):
    t = np.asarray(t, dtype=np.float64)
    return np.where(t <= mu, 0.5 * t * t, mu * t - 0.5 * mu * mu)


class KdeHuber(BoundObjective):
    """Robust kernel-weight objective over the simplex of sample weights.

    f(w) = sum_i huber(sqrt(w'Kw - 2 e_i'Kw + K_ii)) for the Gaussian kernel
    matrix K of the sample points.  K is never materialized: columns are
    recomputed on demand and dense products run in row blocks.  Caches the
    vector u = K w, the scalar q = w'Kw and ||w||^2.
    """

    def __init__(self, points, bandwidth, huber_mu, poly=None, x0=None, L=None):
        X = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
        self.X = X
        self.n, self.dim_pts = X.shape
        if not bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not huber_mu > 0:
            raise ValueError("huber threshold must be positive")
        self.bandwidth = float(bandwidth)
        self.mu_h = float(huber_mu)
        self.kappa0 = float((2.0 * np.pi * bandwidth ** 2) ** (-self.dim_pts / 2.0))
        self.inv2s2 = 1.0 / (2.0 * bandwidth ** 2)
        self.xsq = np.sum(X * X, axis=1)
        if poly is None:
            poly = StandardSimplex(self.n)
        if not (isinstance(poly, StandardSimplex) and poly.d == self.n):
            raise ValueError("weight vector must live on the simplex of the samples")
        self._L_cached = float(L) if L is not None else None
        self._init_state(poly, x0)

    @property
    def L(self):
        if self._L_cached is None:
            self._L_cached = self.estimate_smoothness()
        return self._L_cached

    def kernel_column(self, j):
        sq = self.xsq - 2.0 * (self.X @ self.X[j]) + self.xsq[j]
        return self.kappa0 * np.exp(-sq * self.inv2s2)

    def matvec(self, v, block=512):
        """K @ v in row blocks, never holding the full n x n matrix."""
        v = np.asarray(v, dtype=np.float64)
        out = np.empty(self.n)
        for lo in range(0, self.n, block):
            hi = min(lo + block, self.n)
            sq = (self.xsq[lo:hi, None] - 2.0 * (self.X[lo:hi] @ self.X.T)
                  + self.xsq[None, :])
            out[lo:hi] = (self.kappa0 * np.exp(-sq * self.inv2s2)) @ v
        return out

    def refresh_cache(self):
        self.u = self.matvec(self.x)
        self.q = float(self.x @ self.u)
        self.sq_x = float(self.x @ self.x)

    def _tsq(self):
        return np.maximum(self.q - 2.0 * self.u + self.kappa0, 0.0)

    def _ratio(self, t):
        # huber'(t)/t: 1 on [0, mu], mu/t beyond
        return np.minimum(1.0, self.mu_h / np.maximum(t, 1e-300))

    def eval(self):
        return float(huber(np.sqrt(self._tsq()), self.mu_h).sum())

    def eval_at(self, y):
        y = np.asarray(y, dtype=np.float64)
        uy = self.matvec(y)
        qy = float(y @ uy)
        tsq = np.maximum(qy - 2.0 * uy + self.kappa0, 0.0)
        return float(huber(np.sqrt(tsq), self.mu_h).sum())

    def grad_at(self, y):
        y = np.asarray(y, dtype=np.float64)
        uy = self.matvec(y)
        qy = float(y @ uy)
        t = np.sqrt(np.maximum(qy - 2.0 * uy + self.kappa0, 0.0))
        ratio = self._ratio(t)
        return float(ratio.sum()) * uy - self.matvec(ratio)

    def full_gradient(self):
        ratio = self._ratio(np.sqrt(self._tsq()))
        return float(ratio.sum()) * self.u - self.matvec(ratio)

    def segment_is_degenerate(self, i, rel=1e-13):
        c = self.sq_x - 2.0 * self.x[i] + 1.0
        return c <= rel * (self.sq_x + 1.0)

    def segment_query(self, i):
        kcol = self.kernel_column(i)
        ratio = self._ratio(np.sqrt(self._tsq()))
        b = ((self.u[i] - self.q) * float(ratio.sum())
             - float(ratio @ (kcol - self.u)))
        c = max(self.sq_x - 2.0 * self.x[i] + 1.0, 0.0)
        return SegmentQuery(b=b, c=c)

    def _seg_dphi(self, i, kcol):
        uj = self.u[i]
        dvec = kcol - self.u
        q, u, kappa0, mu_h = self.q, self.u, self.kappa0, self.mu_h

        def dphi(alpha):
            qa = ((1.0 - alpha) ** 2 * q
                  + 2.0 * alpha * (1.0 - alpha) * uj
                  + alpha * alpha * kappa0)
            qp = (-2.0 * (1.0 - alpha) * q
                  + (2.0 - 4.0 * alpha) * uj
                  + 2.0 * alpha * kappa0)
            t = np.sqrt(np.maximum(qa - 2.0 * (u + alpha * dvec) + kappa0, 0.0))
            ratio = np.minimum(1.0, mu_h / np.maximum(t, 1e-300))
            return 0.5 * qp * float(ratio.sum()) - float(ratio @ dvec)

        return dphi

    def line_search(self, i, lo, hi, tol=1e-12, max_iter=200):
        if hi < lo:
            raise ValueError(f"empty step interval [{lo}, {hi}]")
        c = self.sq_x - 2.0 * self.x[i] + 1.0
        if c <= 0.0:
            return lo
        return bisect_line_min(self._seg_dphi(i, self.kernel_column(i)), lo, hi,
                               tol=tol, max_iter=max_iter)

    def apply_step(self, i, alpha):
        if alpha == 0.0:
            self._bump()
            return
        kcol = self.kernel_column(i)
        if alpha == 1.0:
            self.u = kcol
            self.q = self.kappa0
            self.x[:] = 0.0
            self.x[i] = 1.0
            self.sq_x = 1.0
        else:
            uj = self.u[i]
            wj = self.x[i]
            self.u += alpha * (kcol - self.u)
            self.q = ((1.0 - alpha) ** 2 * self.q
                      + 2.0 * alpha * (1.0 - alpha) * uj
                      + alpha * alpha * self.kappa0)
            self.x *= 1.0 - alpha
            self.x[i] += alpha
            self.sq_x = ((1.0 - alpha) ** 2 * self.sq_x
                         + 2.0 * alpha * (1.0 - alpha) * wj
                         + alpha * alpha)
        self._bump()

    def pair_line_search(self, i, j, lo, hi):
        ki = self.kernel_column(i)
        kj = self.kernel_column(j)
        dvec = ki - kj
        kii, kij, kjj = ki[i], ki[j], kj[j]
        curv = kii - 2.0 * kij + kjj
        ui, uj = self.u[i], self.u[j]
        q, u, kappa0, mu_h = self.q, self.u, self.kappa0, self.mu_h

        def dphi(theta):
            qa = q + 2.0 * theta * (ui - uj) + theta * theta * curv
            qp = 2.0 * (ui - uj) + 2.0 * theta * curv
            t = np.sqrt(np.maximum(qa - 2.0 * (u + theta * dvec) + kappa0, 0.0))
            ratio = np.minimum(1.0, mu_h / np.maximum(t, 1e-300))
            return 0.5 * qp * float(ratio.sum()) - float(ratio @ dvec)

        return bisect_line_min(dphi, lo, hi)

    def apply_pair_step(self, i, j, theta):
        if theta == 0.0:
            self._bump()
            return
        ki = self.kernel_column(i)
        kj = self.kernel_column(j)
        curv = ki[i] - 2.0 * ki[j] + kj[j]
        self.q += 2.0 * theta * (self.u[i] - self.u[j]) + theta * theta * curv
        self.u += theta * (ki - kj)
        xi, xj = self.x[i], self.x[j]
        self.x[i] += theta
        self.x[j] -= theta
        self.sq_x += 2.0 * theta * (xi - xj) + 2.0 * theta * theta
        self._bump()

    def estimate_smoothness(self):
        # each huber-of-distance term is 1-smooth in the K^(1/2) metric, so
        # the sum of n terms is bounded by n * sigma_max(K); K is symmetric
        # PSD, so the power iteration yields sigma_max(K) directly
        sig = _power_sigma_sq(self.matvec, lambda v: v, self.n, iters=30)
        return max(1.01 * self.n * sig, 1e-12)

    def kernel_name(self):
        return "kde_cycle"

    def run_cycle(self, fn, order, lam, grad_rule, away,
                  gamma_cap, drop_tol, ls_tol, ls_max_iter):
        L = self.L if grad_rule else 1.0
        self.q, self.sq_x = fn(self.X, self.xsq, self.u, self.x, lam, order,
                               grad_rule, away, L, self.kappa0,
                               self.inv2s2, self.mu_h, self.q, self.sq_x,
                               gamma_cap, drop_tol, ls_tol, ls_max_iter)
        self._bump(len(order))


class Quadratic(BoundObjective):
    """f(x) = 0.5 x'Qx + q'x + c0 on a small polytope; exact constants.

    Used by the rate-bound suites: L and the strong-convexity modulus mu are
    the extreme eigenvalues of Q, computed exactly.
    """

    def __init__(self, Q, qlin=None, c0=0.0, poly=None, x0=None):
        Q = np.asarray(Q, dtype=np.float64)
        Q = 0.5 * (Q + Q.T)
        self.Q = Q
        self.d = Q.shape[0]
        self.qlin = (np.zeros(self.d) if qlin is None
                     else np.asarray(qlin, dtype=np.float64))
        self.c0 = float(c0)
        if poly is None:
            raise ValueError("Quadratic needs an explicit polytope")
        if poly.d != self.d:
            raise ValueError("objective/polytope dimension mismatch")
        evals = np.linalg.eigvalsh(Q)
        self.L = max(float(np.abs(evals).max()), 1e-12)
        self.mu = float(evals.min())
        self._QV = poly.vertex_matrix() @ Q  # row i = (Q v_i)'
        self._init_state(poly, x0)

    def refresh_cache(self):
        self.g = self.Q @ self.x

    def eval(self):
        return float(0.5 * (self.x @ self.g) + self.qlin @ self.x + self.c0)

    def eval_at(self, y):
        y = np.asarray(y, dtype=np.float64)
        return float(0.5 * (y @ (self.Q @ y)) + self.qlin @ y + self.c0)

    def grad_at(self, y):
        return self.Q @ np.asarray(y, dtype=np.float64) + self.qlin

    def full_gradient(self):
        return self.g + self.qlin

    def estimate_smoothness(self):
        return self.L

    def segment_is_degenerate(self, i, rel=1e-13):
        v = self.poly.vertex(i)
        dv = v - self.x
        return float(dv @ dv) <= rel * (float(self.x @ self.x) + float(v @ v))

    def segment_query(self, i):
        dv = self.poly.vertex(i) - self.x
        b = float((self.g + self.qlin) @ dv)
        return SegmentQuery(b=b, c=float(dv @ dv))

    def line_search(self, i, lo, hi, tol=1e-12, max_iter=200):
        if hi < lo:
            raise ValueError(f"empty step interval [{lo}, {hi}]")
        dv = self.poly.vertex(i) - self.x
        b = float((self.g + self.qlin) @ dv)
        curv = float((self._QV[i] - self.g) @ dv)
        if curv <= 0.0:
            return lo if b >= 0.0 else hi
        return min(max(-b / curv, lo), hi)

    def apply_step(self, i, alpha):
        if alpha == 0.0:
            self._bump()
            return
        if alpha == 1.0:
            self.x = self.poly.vertex(i)
            self.g = self._QV[i].copy()
        else:
            v = self.poly.vertex(i)
            self.x += alpha * (v - self.x)
            self.g += alpha * (self._QV[i] - self.g)
        self._bump()

    def pair_line_search(self, i, j, lo, hi):
        b = float(self.g[i] - self.g[j] + self.qlin[i] - self.qlin[j])
        curv = float(self.Q[i, i] - 2.0 * self.Q[i, j] + self.Q[j, j])
        if curv <= 0.0:
            return lo if b >= 0.0 else hi
        return min(max(-b / curv, lo), hi)

    def apply_pair_step(self, i, j, theta):
        if theta == 0.0:
            self._bump()
            return
        self.x[i] += theta
        self.x[j] -= theta
        self.g += theta * (self.Q[:, i] - self.Q[:, j])
        self._bump()
