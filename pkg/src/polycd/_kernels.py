"""Hot inner-loop kernels with a numba backend and a pure-numpy fallback.

Each kernel runs one full outer pass (one sweep over the vertex visit
order) of the cyclic solver for one objective family, mutating the iterate
and its cached quantities in place.  The same source serves both backends:
the bodies are written in the numpy subset that numba's ``njit`` compiles,
so the fallback is simply the uncompiled function.

Backend selection: the environment variable ``POLYCD_NUMBA`` ("0"/"off" to
force the numpy path, "1"/"on" to require numba) sets the default at import
time; :func:`use_backend` switches it at runtime, which the kernel
benchmark and the backend-equivalence tests rely on.
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

_TRUTHY = ("1", "true", "on", "yes")
_FALSY = ("0", "false", "off", "no")


def _default_backend():
    env = os.environ.get("POLYCD_NUMBA", "").strip().lower()
    if env in _FALSY:
        return "numpy"
    if env in _TRUTHY:
        if not HAVE_NUMBA:
            raise ImportError("POLYCD_NUMBA requests numba but numba is not installed")
        return "numba"
    return "numba" if HAVE_NUMBA else "numpy"


_BACKEND = _default_backend()
_PY_FUNCS = {}
_JIT_FUNCS = {}


def use_backend(name):
    """Select 'numba' or 'numpy' for all subsequent kernel lookups."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _BACKEND = name


def active_backend():
    return _BACKEND


def _register(fn):
    _PY_FUNCS[fn.__name__] = fn
    return fn


def kernel(name, backend=None):
    """Return the kernel implementation for the active (or given) backend."""
    backend = backend or _BACKEND
    if backend == "numpy":
        return _PY_FUNCS[name]
    jit = _JIT_FUNCS.get(name)
    if jit is None:
        jit = numba.njit(cache=True)(_PY_FUNCS[name])
        _JIT_FUNCS[name] = jit
    return jit


def warmup(names=None):
    """Compile the named kernels (all by default) by running them on tiny
    synthetic inputs with the production argument types, so that timed
    sections never include JIT latency.  Compiled artifacts are disk-cached,
    making this near-instant after the first session."""
    if not HAVE_NUMBA:
        return
    n, d = 6, 3
    rng = np.random.default_rng(0)
    A_cols = rng.standard_normal((d, n))
    bvec = rng.standard_normal(n)
    ylab = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    X = rng.standard_normal((n, 2))
    xsq = np.sum(X * X, axis=1)
    coords = np.repeat(np.arange(d, dtype=np.int64), 2)
    scales = np.tile(np.array([1.0, -1.0]), d)
    order = np.arange(2 * d, dtype=np.int64)
    korder = np.arange(n, dtype=np.int64)
    for name in names or list(_PY_FUNCS):
        fn = kernel(name, backend="numba")
        for grad_rule in (False, True):
            for away in (False, True):
                lam = np.zeros(2 * d)
                lam[0] = 1.0
                x = np.zeros(d)
                x[0] = 1.0
                z = A_cols[0].copy()
                if name == "ls_cycle":
                    fn(A_cols, bvec, z, x, lam, order, coords, scales,
                       grad_rule, away, 1.0, 1.0, 1e12, 1e-14)
                elif name == "logistic_cycle":
                    fn(A_cols, ylab, z, x, lam, order, coords, scales,
                       grad_rule, away, 1.0, 1.0, 1e12, 1e-14, 1e-12, 200)
                elif name == "kde_cycle":
                    kappa0, inv2s2 = 0.15, 0.5
                    u = kappa0 * np.exp(-(xsq - 2 * X @ X[0] + xsq[0]) * inv2s2)
                    wv = np.zeros(n)
                    wv[0] = 1.0
                    klam = np.zeros(n)
                    klam[0] = 1.0
                    fn(X, xsq, u, wv, klam, korder, grad_rule, away,
                       1.0, kappa0, inv2s2, 0.4, kappa0, 1.0,
                       1e12, 1e-14, 1e-12, 200)


# ---------------------------------------------------------------------------
# shared step conventions
#
# Every kernel visits vertices in the given order.  For vertex index i the
# admissible step interval is [0, 1], or [-gamma_i, 1] in away mode with
# gamma_i = lam_i / (1 - lam_i) capped at gamma_cap.  A step landing within
# drop_tol of -gamma_i is snapped to it and the weight is written as an
# exact zero.
#
# Degenerate segments (v_i == x up to float cancellation, detected by
# ||v - x||^2 falling below a relative floor) are skipped with alpha = 0:
# every step size leaves x unchanged there, and any other choice would only
# rescale the weights and amplify last-bit cache noise -- with lam_i = 1 the
# admissible interval is formally unbounded below, so this is also the only
# numerically safe reading of that convention.
# ---------------------------------------------------------------------------

_DEGENERATE_REL = 1e-13


@_register
def ls_cycle(A_cols, bvec, z, x, lam, order, vcoord, vscale,
             grad_rule, away, L, sq_x, gamma_cap, drop_tol):
    """One outer pass on f(x) = ||A x - b||^2.

    A_cols is A transposed to (d, n) so that the data column of coordinate j
    is the contiguous row A_cols[j]; z caches A x; sq_x caches ||x||^2 and
    the updated value is returned.  lam is the convex-combination weight
    vector (ignored unless away).
    """
    for idx in range(order.shape[0]):
        i = order[idx]
        j = vcoord[i]
        s = vscale[i]
        col = A_cols[j]
        xj = x[j]
        c = sq_x - 2.0 * s * xj + s * s
        if c <= _DEGENERATE_REL * (sq_x + s * s):
            continue
        w = s * col - z

        lo = 0.0
        capped = False
        if away:
            li = lam[i]
            if li >= 1.0:
                lo = -gamma_cap
                capped = True
            else:
                gma = li / (1.0 - li)
                if gma > gamma_cap:
                    gma = gamma_cap
                    capped = True
                lo = -gma

        if grad_rule:
            bval = 2.0 * (np.dot(w, z) - np.dot(w, bvec))
            alpha = -bval / (L * c)
        else:
            den = np.dot(w, w)
            if den <= 0.0:
                alpha = lo
            else:
                alpha = -(np.dot(w, z) - np.dot(w, bvec)) / den
        if alpha < lo:
            alpha = lo
        if alpha > 1.0:
            alpha = 1.0

        dropped = False
        if away and not capped and abs(alpha - lo) <= drop_tol * max(1.0, -lo):
            alpha = lo
            dropped = True

        if alpha != 0.0:
            if alpha == 1.0:
                z[:] = s * col
                x[:] = 0.0
                x[j] = s
                sq_x = s * s
            else:
                z += alpha * w
                x *= 1.0 - alpha
                x[j] += alpha * s
                sq_x = ((1.0 - alpha) ** 2 * sq_x
                        + 2.0 * alpha * (1.0 - alpha) * s * xj
                        + alpha * alpha * s * s)
        if away:
            lam *= 1.0 - alpha
            if dropped:
                lam[i] = 0.0
            else:
                lam[i] += alpha
    return sq_x


@_register
def logistic_cycle(A_cols, ylab, z, x, lam, order, vcoord, vscale,
                   grad_rule, away, L, sq_x, gamma_cap, drop_tol,
                   ls_tol, ls_max_iter):
    """One outer pass on f(x) = sum_i log(1 + exp(-y_i a_i' x)); z caches A x."""

    def dphi(alpha, ym, yw):
        # derivative of f along the segment at step alpha
        m = ym + alpha * yw
        sig = 1.0 / (1.0 + np.exp(np.minimum(m, 700.0)))
        return -np.dot(sig, yw)

    for idx in range(order.shape[0]):
        i = order[idx]
        j = vcoord[i]
        s = vscale[i]
        col = A_cols[j]
        xj = x[j]
        c = sq_x - 2.0 * s * xj + s * s
        if c <= _DEGENERATE_REL * (sq_x + s * s):
            continue
        w = s * col - z
        yw = ylab * w
        ym = ylab * z

        lo = 0.0
        capped = False
        if away:
            li = lam[i]
            if li >= 1.0:
                lo = -gamma_cap
                capped = True
            else:
                gma = li / (1.0 - li)
                if gma > gamma_cap:
                    gma = gamma_cap
                    capped = True
                lo = -gma

        if grad_rule:
            bval = dphi(0.0, ym, yw)
            alpha = -bval / (L * c)
            if alpha < lo:
                alpha = lo
            if alpha > 1.0:
                alpha = 1.0
        else:
            if dphi(lo, ym, yw) >= 0.0:
                alpha = lo
            elif dphi(1.0, ym, yw) <= 0.0:
                alpha = 1.0
            else:
                a = lo
                b = 1.0
                it = 0
                while b - a > ls_tol and it < ls_max_iter:
                    mid = 0.5 * (a + b)
                    if dphi(mid, ym, yw) >= 0.0:
                        b = mid
                    else:
                        a = mid
                    it += 1
                alpha = 0.5 * (a + b)

        dropped = False
        if away and not capped and abs(alpha - lo) <= drop_tol * max(1.0, -lo):
            alpha = lo
            dropped = True

        if alpha != 0.0:
            if alpha == 1.0:
                z[:] = s * col
                x[:] = 0.0
                x[j] = s
                sq_x = s * s
            else:
                z += alpha * w
                x *= 1.0 - alpha
                x[j] += alpha * s
                sq_x = ((1.0 - alpha) ** 2 * sq_x
                        + 2.0 * alpha * (1.0 - alpha) * s * xj
                        + alpha * alpha * s * s)
        if away:
            lam *= 1.0 - alpha
            if dropped:
                lam[i] = 0.0
            else:
                lam[i] += alpha
    return sq_x


@_register
def kde_cycle(X, xsq, u, wv, lam, order, grad_rule, away,
              L, kappa0, inv2s2, mu_h, q, sq_w, gamma_cap, drop_tol,
              ls_tol, ls_max_iter):
    """One outer pass on the kernel-weight objective over the simplex.

    wv holds the weights, u caches K wv and q caches wv' K wv; kernel-matrix
    columns are recomputed on demand from the sample points X (row square
    norms in xsq), so K itself is never materialized.  Returns (q, sq_w).
    """

    def dphi(alpha, q, uj, u, dvec, kappa0, mu_h):
        qa = ((1.0 - alpha) ** 2 * q
              + 2.0 * alpha * (1.0 - alpha) * uj
              + alpha * alpha * kappa0)
        qp = (-2.0 * (1.0 - alpha) * q
              + (2.0 - 4.0 * alpha) * uj
              + 2.0 * alpha * kappa0)
        ua = u + alpha * dvec
        t = np.sqrt(np.maximum(qa - 2.0 * ua + kappa0, 0.0))
        ratio = np.minimum(1.0, mu_h / np.maximum(t, 1e-300))
        return 0.5 * qp * ratio.sum() - np.dot(ratio, dvec)

    for idx in range(order.shape[0]):
        j = order[idx]
        uj = u[j]
        wj = wv[j]
        c = sq_w - 2.0 * wj + 1.0
        if c <= _DEGENERATE_REL * (sq_w + 1.0):
            continue
        kcol = kappa0 * np.exp(-(xsq - 2.0 * np.dot(X, X[j]) + xsq[j]) * inv2s2)
        dvec = kcol - u

        lo = 0.0
        capped = False
        if away:
            li = lam[j]
            if li >= 1.0:
                lo = -gamma_cap
                capped = True
            else:
                gma = li / (1.0 - li)
                if gma > gamma_cap:
                    gma = gamma_cap
                    capped = True
                lo = -gma

        if grad_rule:
            t = np.sqrt(np.maximum(q - 2.0 * u + kappa0, 0.0))
            ratio = np.minimum(1.0, mu_h / np.maximum(t, 1e-300))
            bval = (uj - q) * ratio.sum() - np.dot(ratio, dvec)
            alpha = -bval / (L * c)
            if alpha < lo:
                alpha = lo
            if alpha > 1.0:
                alpha = 1.0
        else:
            if dphi(lo, q, uj, u, dvec, kappa0, mu_h) >= 0.0:
                alpha = lo
            elif dphi(1.0, q, uj, u, dvec, kappa0, mu_h) <= 0.0:
                alpha = 1.0
            else:
                a = lo
                b = 1.0
                it = 0
                while b - a > ls_tol and it < ls_max_iter:
                    mid = 0.5 * (a + b)
                    if dphi(mid, q, uj, u, dvec, kappa0, mu_h) >= 0.0:
                        b = mid
                    else:
                        a = mid
                    it += 1
                alpha = 0.5 * (a + b)

        dropped = False
        if away and not capped and abs(alpha - lo) <= drop_tol * max(1.0, -lo):
            alpha = lo
            dropped = True

        if alpha != 0.0:
            if alpha == 1.0:
                u[:] = kcol
                q = kappa0
                wv[:] = 0.0
                wv[j] = 1.0
                sq_w = 1.0
            else:
                u += alpha * dvec
                q = ((1.0 - alpha) ** 2 * q
                     + 2.0 * alpha * (1.0 - alpha) * uj
                     + alpha * alpha * kappa0)
                wv *= 1.0 - alpha
                wv[j] += alpha
                sq_w = ((1.0 - alpha) ** 2 * sq_w
                        + 2.0 * alpha * (1.0 - alpha) * wj
                        + alpha * alpha)
        if away:
            lam *= 1.0 - alpha
            if dropped:
                lam[j] = 0.0
            else:
                lam[j] += alpha
    return q, sq_w
