"""Chart-based Riemannian geometry kernel."""
from .manifold import ClosedForms, ManifoldDescriptor, Point, Tangent, point, tangent
from .builtin import (
    builtin_names,
    euclidean,
    get_manifold,
    householder_basis,
    hyperbolic_plane,
    sphere,
    sphere_polar,
    spd2,
)
from .ode import christoffel_batch, integrate_geodesics, integrate_transport
from .maps import (
    dexp,
    dlog,
    dlog_base,
    distance,
    distance_c,
    exp,
    exp_c,
    frechet_hessian,
    geodesic_solve,
    geodesic_solve_c,
    log,
    log_c,
    ode_transport_c,
    parallel_transport,
    parallel_transport_c,
    shooting_log_c,
)
from .curvature import (
    CurvatureOperator,
    christoffel,
    curvature_of_covariance,
    curvature_of_covariance_intrinsic,
    curvature_operator,
    curvature_tensor,
    sectional_curvature,
)

__all__ = [
    "ClosedForms", "ManifoldDescriptor", "Point", "Tangent", "point", "tangent",
    "builtin_names", "euclidean", "get_manifold", "householder_basis",
    "hyperbolic_plane", "sphere", "sphere_polar", "spd2",
    "christoffel_batch", "integrate_geodesics", "integrate_transport",
    "dexp", "dlog", "dlog_base", "distance", "distance_c", "exp", "exp_c",
    "frechet_hessian", "geodesic_solve", "geodesic_solve_c", "log", "log_c",
    "ode_transport_c", "parallel_transport", "parallel_transport_c",
    "shooting_log_c",
    "CurvatureOperator", "christoffel", "curvature_of_covariance",
    "curvature_of_covariance_intrinsic", "curvature_operator",
    "curvature_tensor", "sectional_curvature",
]
