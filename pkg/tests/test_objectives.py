import numpy as np
import pytest

from polycd import (KdeHuber, L1Ball, LeastSquares, Logistic, Quadratic,
                    StandardSimplex, grad_step_alpha)
from polycd.verify import DenseKdeHuber, finite_diff_gradient, golden_section_min


def motivating_setup():
    """f(x) = (x1-2)^2 + (x2-2)^2 over the unit l1 ball, iterate (0, 1)."""
    ball = L1Ball(2, 1.0)
    obj = LeastSquares(np.eye(2), np.array([2.0, 2.0]), ball,
                       x0=np.array([0.0, 1.0]))
    return ball, obj


def random_logistic(n=40, d=12, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    labels = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    return Logistic(A, labels, L1Ball(d, 2.0))


def random_kde(n=30, seed=0):
    rng = np.random.default_rng(seed)
    return KdeHuber(rng.standard_normal((n, 2)) * 2.0, 1.0, 0.4)


# -- eval ------------------------------------------------------------------


def test_eval_least_squares_identity():
    obj = LeastSquares(np.eye(2), np.zeros(2), L1Ball(2, 1.0),
                       x0=np.array([1.0, 0.0]))
    assert obj.eval() == pytest.approx(1.0)


def test_eval_logistic_zero_margin():
    obj = Logistic(np.zeros((1, 3)), [1.0], StandardSimplex(3))
    assert obj.eval() == pytest.approx(np.log(2.0))


def test_eval_kde_single_point_is_zero():
    obj = KdeHuber(np.zeros((1, 2)), 1.0, 0.4)
    # q - 2u + K00 = K00 - 2K00 + K00 = 0 at w = (1)
    assert obj.eval() == pytest.approx(0.0, abs=1e-15)


# -- segment_query ---------------------------------------------------------


def test_segment_query_hand_gradient():
    ball, obj = motivating_setup()
    q = obj.segment_query(0)  # vertex +e1
    assert q.b == pytest.approx(-2.0, rel=1e-12)
    assert q.c == pytest.approx(2.0, rel=1e-12)


def test_segment_query_at_own_vertex_is_degenerate():
    obj = LeastSquares(np.eye(2), np.zeros(2), L1Ball(2, 1.0),
                       x0=np.array([1.0, 0.0]))
    q = obj.segment_query(0)
    assert q.b == pytest.approx(0.0, abs=1e-14)
    assert q.c == pytest.approx(0.0, abs=1e-14)


def test_segment_query_matches_full_gradient():
    rng = np.random.default_rng(1)
    ball = L1Ball(10, 1.5)
    A = rng.standard_normal((25, 10))
    objs = [LeastSquares(A, rng.standard_normal(25), ball),
            random_logistic(seed=2), random_kde(seed=3)]
    for obj in objs:
        poly = obj.poly
        x0 = poly.project(rng.standard_normal(poly.d))
        obj.reset(x0)
        g = obj.full_gradient()
        for i in range(0, poly.M, 3):
            q = obj.segment_query(i)
            want = float(g @ (poly.vertex(i) - obj.x))
            assert q.b == pytest.approx(want, rel=1e-10, abs=1e-10)


# -- apply_step ------------------------------------------------------------


def test_apply_step_zero_is_noop():
    _, obj = motivating_setup()
    x, z = obj.x.copy(), obj.z.copy()
    obj.apply_step(0, 0.0)
    assert np.array_equal(obj.x, x) and np.array_equal(obj.z, z)


def test_apply_step_one_lands_exactly_on_vertex():
    _, obj = motivating_setup()
    obj.apply_step(0, 1.0)
    assert np.array_equal(obj.x, [1.0, 0.0])
    # residual cache equals A v - b exactly
    assert np.array_equal(obj.z - obj.bvec, np.array([1.0, 0.0]) - obj.bvec)


def test_kde_apply_step_quadratic_form():
    # two points: q after stepping halfway toward e2 expands to
    # 0.25 k0 + 0.5 k1 + 0.25 k0
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    obj = KdeHuber(pts, 1.0, 0.4, x0=np.array([1.0, 0.0]))
    k0 = obj.kappa0
    k1 = obj.kernel_column(0)[1]
    obj.apply_step(1, 0.5)
    assert obj.q == pytest.approx(0.25 * k0 + 0.5 * k1 + 0.25 * k0, rel=1e-12)


def test_cache_consistency_after_many_steps():
    rng = np.random.default_rng(4)
    for obj in (LeastSquares(rng.standard_normal((30, 8)),
                             rng.standard_normal(30), L1Ball(8, 2.0)),
                random_logistic(seed=5), random_kde(n=20, seed=6)):
        poly = obj.poly
        for _ in range(10_000):
            i = int(rng.integers(poly.M))
            obj.apply_step(i, float(rng.random()) * 0.5)
        z_inc = obj.z.copy() if hasattr(obj, "z") else obj.u.copy()
        obj.refresh_cache()
        z_new = obj.z if hasattr(obj, "z") else obj.u
        scale = max(1.0, float(np.max(np.abs(z_new))))
        assert np.max(np.abs(z_inc - z_new)) <= 1e-6 * scale


# -- line search -----------------------------------------------------------


def test_line_search_motivating_example():
    _, obj = motivating_setup()
    # 1D slice: (alpha-2)^2 + (1-alpha-2)^2, derivative 4 alpha - 2
    alpha = obj.line_search(0, 0.0, 1.0)
    assert alpha == pytest.approx(0.5, rel=1e-12)
    obj.apply_step(0, alpha)
    assert np.allclose(obj.x, [0.5, 0.5])


def test_line_search_no_descent_returns_lo():
    obj = LeastSquares(np.eye(2), np.zeros(2), L1Ball(2, 1.0),
                       x0=np.array([0.2, 0.0]))
    # moving toward +e1 only increases ||x||^2
    assert obj.line_search(0, 0.0, 1.0) == 0.0


def test_line_search_rejects_empty_interval():
    _, obj = motivating_setup()
    with pytest.raises(ValueError):
        obj.line_search(0, 1.0, 0.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bisection_matches_golden_section(seed):
    for obj in (random_logistic(seed=seed), random_kde(seed=seed)):
        poly = obj.poly
        rng = np.random.default_rng(seed + 10)
        obj.reset(poly.project(rng.standard_normal(poly.d)))
        for i in range(0, poly.M, 5):
            a_bis = obj.line_search(i, 0.0, 1.0)
            x0 = obj.x.copy()
            v = poly.vertex(i)
            a_gold = golden_section_min(
                lambda a: obj.eval_at(x0 + a * (v - x0)), 0.0, 1.0, tol=1e-8)
            assert abs(a_bis - a_gold) <= 1e-7


def test_line_search_first_order_optimality():
    rng = np.random.default_rng(7)
    obj = random_logistic(seed=8)
    poly = obj.poly
    obj.reset(poly.project(rng.standard_normal(poly.d)))
    h = 1e-7
    for i in range(poly.M):
        alpha = obj.line_search(i, 0.0, 1.0)
        x0 = obj.x.copy()
        v = poly.vertex(i)
        g = lambda a: obj.eval_at(x0 + a * (v - x0))
        slope = (g(min(alpha + h, 1.0)) - g(max(alpha - h, 0.0))) / (2 * h)
        if 1e-6 < alpha < 1 - 1e-6:
            assert abs(slope) <= 1e-5 * max(1.0, abs(g(alpha)))
        elif alpha <= 1e-6:
            assert slope >= -1e-5
        else:
            assert slope <= 1e-5


def test_descent_per_line_search_step():
    rng = np.random.default_rng(9)
    for obj in (random_logistic(seed=11), random_kde(seed=12)):
        poly = obj.poly
        obj.reset(poly.project(rng.standard_normal(poly.d)))
        f = obj.eval()
        for i in range(poly.M):
            alpha = obj.line_search(i, 0.0, 1.0)
            obj.apply_step(i, alpha)
            f_new = obj.eval()
            assert f_new <= f + 1e-12 * max(1.0, abs(f))
            f = f_new


# -- one-dimensional gradient rule ------------------------------------------


def test_grad_step_alpha_examples():
    assert grad_step_alpha(-2.0, 2.0, 2.0, 0.0, 1.0) == pytest.approx(0.5)
    assert grad_step_alpha(3.0, 1.0, 1.0, 0.0, 1.0) == 0.0
    assert grad_step_alpha(-10.0, 1.0, 1.0, 0.0, 1.0) == 1.0


def test_grad_step_alpha_degenerate_segment():
    assert grad_step_alpha(0.5, 0.0, 1.0, -2.0, 1.0) == -2.0
    assert grad_step_alpha(-0.5, 0.0, 1.0, -2.0, 1.0) == 1.0


def test_grad_step_alpha_random_clamp_property():
    rng = np.random.default_rng(13)
    for _ in range(300):
        b = float(rng.standard_normal() * 5)
        c = float(abs(rng.standard_normal()) + 1e-3)
        L = float(abs(rng.standard_normal()) + 1e-3)
        lo = float(-abs(rng.standard_normal()))
        alpha = grad_step_alpha(b, c, L, lo, 1.0)
        assert lo <= alpha <= 1.0
        unc = -b / (L * c)
        assert alpha == pytest.approx(min(max(unc, lo), 1.0))


def test_grad_rule_one_step_inequality():
    # <grad f(x_old), x_new - x_old> <= -L ||x_new - x_old||^2
    rng = np.random.default_rng(14)
    obj = random_logistic(seed=15)
    poly = obj.poly
    L = obj.L
    obj.reset(poly.project(rng.standard_normal(poly.d)))
    for i in range(poly.M):
        q = obj.segment_query(i)
        alpha = grad_step_alpha(q.b, q.c, L, 0.0, 1.0)
        g_old = obj.full_gradient()
        x_old = obj.x.copy()
        obj.apply_step(i, alpha)
        step = obj.x - x_old
        lhs = float(g_old @ step)
        rhs = -L * float(step @ step)
        assert lhs <= rhs + 1e-10 * max(1.0, abs(lhs))


def test_grad_rule_descent():
    rng = np.random.default_rng(16)
    for obj in (random_logistic(seed=17), random_kde(seed=18)):
        poly = obj.poly
        L = obj.L
        obj.reset(poly.project(rng.standard_normal(poly.d)))
        f = obj.eval()
        for i in range(poly.M):
            q = obj.segment_query(i)
            obj.apply_step(i, grad_step_alpha(q.b, q.c, L, 0.0, 1.0))
            f_new = obj.eval()
            assert f_new <= f + 1e-12 * max(1.0, abs(f))
            f = f_new


# -- full gradient ----------------------------------------------------------


def test_full_gradient_identity_quadratic():
    obj = LeastSquares(np.eye(3), np.zeros(3), StandardSimplex(3),
                       x0=np.array([0.2, 0.3, 0.5]))
    assert np.allclose(obj.full_gradient(), 2 * obj.x)


def test_full_gradient_zero_matrix_logistic():
    obj = Logistic(np.zeros((4, 3)), [1.0, -1.0, 1.0, -1.0], StandardSimplex(3))
    assert np.allclose(obj.full_gradient(), 0.0)


@pytest.mark.parametrize("family,tol", [("ls", 1e-4), ("logistic", 1e-4),
                                        ("kde", 1e-3)])
def test_gradient_matches_finite_differences(family, tol):
    rng = np.random.default_rng(19)
    for rep in range(5):
        if family == "ls":
            obj = LeastSquares(rng.standard_normal((30, 10)),
                               rng.standard_normal(30), L1Ball(10, 2.0))
        elif family == "logistic":
            obj = random_logistic(seed=20 + rep)
        else:
            obj = random_kde(n=25, seed=21 + rep)
        x = obj.poly.project(rng.standard_normal(obj.poly.d))
        g = obj.grad_at(x)
        fd = finite_diff_gradient(obj, x, h=1e-5)
        err = np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g))
        assert err <= tol


# -- smoothness estimates ----------------------------------------------------


def test_estimate_smoothness_identity():
    obj = LeastSquares(np.eye(5), np.zeros(5), StandardSimplex(5))
    assert obj.L == pytest.approx(2.02, rel=1e-6)


def test_estimate_smoothness_zero_matrix_floor():
    obj = LeastSquares(np.zeros((4, 3)), np.zeros(4), StandardSimplex(3))
    assert obj.L == pytest.approx(1e-12)


def test_estimate_smoothness_upper_bounds_dense_eig():
    rng = np.random.default_rng(22)
    A = rng.standard_normal((50, 20))
    lam_max = float(np.linalg.eigvalsh(A.T @ A).max())
    ls = LeastSquares(A, rng.standard_normal(50), L1Ball(20, 1.0))
    assert ls.L >= 2.0 * lam_max
    lg = Logistic(A, np.where(rng.random(50) < 0.5, 1.0, -1.0), L1Ball(20, 1.0))
    assert lg.L >= 0.25 * lam_max


def test_kde_smoothness_bounds_operator():
    obj = random_kde(n=40, seed=23)
    K = np.array([obj.kernel_column(j) for j in range(40)])
    lam_max = float(np.linalg.eigvalsh(K).max())
    assert obj.L >= 40 * lam_max  # sum of n huber terms, each K-smooth


# -- kde cache vs direct dense evaluation ------------------------------------


def test_kde_cache_matches_dense_direct_evaluation():
    rng = np.random.default_rng(24)
    pts = rng.standard_normal((120, 2)) * 3.0
    obj = KdeHuber(pts, 1.0, 0.4)
    dense = DenseKdeHuber(pts, 1.0, 0.4)
    w = obj.poly.project(rng.random(120))
    obj.reset(w)
    for _ in range(40):
        i = int(rng.integers(120))
        a = float(rng.random() * 0.3)
        obj.apply_step(i, a)
    f_cached = obj.eval()
    f_direct = dense.eval_at(obj.x)
    assert f_cached == pytest.approx(f_direct, rel=1e-9)
    # never materializes K: the production object has no dense attribute
    assert not hasattr(obj, "_K")


def test_kde_tsq_nonnegative_invariant():
    obj = random_kde(n=50, seed=25)
    rng = np.random.default_rng(26)
    obj.reset(obj.poly.project(rng.random(50)))
    for _ in range(200):
        obj.apply_step(int(rng.integers(50)), float(rng.random()))
        tsq_raw = obj.q - 2.0 * obj.u + obj.kappa0
        assert tsq_raw.min() >= -1e-12


# -- pair moves (two-coordinate machinery) -----------------------------------


@pytest.mark.parametrize("family", ["ls", "logistic", "kde", "quad"])
def test_pair_step_matches_fresh_recompute(family):
    rng = np.random.default_rng(27)
    d = 8
    simp = StandardSimplex(d)
    if family == "ls":
        obj = LeastSquares(rng.standard_normal((20, d)), rng.standard_normal(20), simp)
    elif family == "logistic":
        obj = Logistic(rng.standard_normal((20, d)),
                       np.where(rng.random(20) < 0.5, 1.0, -1.0), simp)
    elif family == "kde":
        obj = KdeHuber(rng.standard_normal((d, 2)), 1.0, 0.4)
    else:
        B = rng.standard_normal((d, d))
        obj = Quadratic(B.T @ B, rng.standard_normal(d), poly=simp)
    poly = obj.poly
    obj.reset(np.full(poly.d, 1.0 / poly.d))
    for _ in range(30):
        i, j = rng.choice(poly.d, size=2, replace=False)
        lo, hi = -obj.x[i], obj.x[j]
        theta = obj.pair_line_search(int(i), int(j), lo, hi)
        assert lo - 1e-12 <= theta <= hi + 1e-12
        x_expect = obj.x.copy()
        x_expect[i] += theta
        x_expect[j] -= theta
        f_before = obj.eval()
        obj.apply_pair_step(int(i), int(j), theta)
        assert np.allclose(obj.x, x_expect, atol=1e-12)
        assert obj.eval() == pytest.approx(obj.eval_at(obj.x), rel=1e-9)
        assert obj.eval() <= f_before + 1e-10 * max(1.0, abs(f_before))
