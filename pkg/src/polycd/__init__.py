"""Solvers and benchmarks for smooth convex minimization over
vertex-enumerated polytopes."""

from ._kernels import active_backend, use_backend, HAVE_NUMBA
from .polytope import (
    ExplicitVertices,
    L1Ball,
    PolytopeConstants,
    PolytopeError,
    StandardSimplex,
    UnsupportedSizeError,
    VertexPolytope,
    project_l1_ball,
    project_simplex,
)
from .objectives import (
    KdeHuber,
    LeastSquares,
    Logistic,
    Quadratic,
    SegmentQuery,
    bisect_line_min,
    grad_step_alpha,
)
from .solvers import (
    GRAD_1D,
    LINE_SEARCH,
    AwayState,
    BoundReport,
    ConsistencyError,
    SolveConfig,
    TraceRecord,
    away_gamma,
    check_linear_bound,
    check_sublinear_bound,
    polycd_solve,
    polycdwa_solve,
    weight_refresh,
)

__version__ = "0.1.0"

__all__ = [
    "AwayState", "BoundReport", "ConsistencyError", "ExplicitVertices",
    "GRAD_1D", "HAVE_NUMBA", "KdeHuber", "L1Ball", "LINE_SEARCH",
    "LeastSquares", "Logistic", "PolytopeConstants", "PolytopeError",
    "Quadratic", "SegmentQuery", "SolveConfig", "StandardSimplex",
    "TraceRecord", "UnsupportedSizeError", "VertexPolytope",
    "active_backend", "away_gamma", "bisect_line_min", "check_linear_bound",
    "check_sublinear_bound", "grad_step_alpha", "polycd_solve",
    "polycdwa_solve", "project_l1_ball", "project_simplex", "use_backend",
    "weight_refresh",
]
