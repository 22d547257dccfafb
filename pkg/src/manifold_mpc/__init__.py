"""Trajectory-tracking MPC for systems evolving on differentiable manifolds."""

from .dynamics import (
    CanonicalSystem,
    LinearizedErrorDynamics,
    ReferencePoint,
    error_state,
    fd_error_jacobians,
    linearize,
    step,
)
from .errors import (
    DegenerateSampleError,
    IllConditionedWeightsError,
    InfeasibleReferenceError,
    OutOfChartError,
    TrackingLostError,
)
from .manifolds import (
    Euclidean,
    Manifold,
    Product,
    Rot2,
    Rot3,
    Sphere2,
    Surface,
    SurfaceModel,
)
from .mpc import (
    CondensedQp,
    MpcConfig,
    MpcController,
    MpcSolution,
    build_condensed,
    mpc_step,
    solve_box_qp,
    solve_unconstrained,
)
from .rotations import a_matrix, skew, so2_exp, so2_log, so3_exp, so3_log
from .simulate import Scenario, SimTrace, metrics, rollout
from .surfaces import (
    SurfaceFit,
    fit_surface,
    fit_surface_window,
    load_surface_samples,
    sample_surface,
    save_surface_samples,
)

__version__ = "0.1.0"

__all__ = [
    "CanonicalSystem",
    "CondensedQp",
    "DegenerateSampleError",
    "Euclidean",
    "IllConditionedWeightsError",
    "InfeasibleReferenceError",
    "LinearizedErrorDynamics",
    "Manifold",
    "MpcConfig",
    "MpcController",
    "MpcSolution",
    "OutOfChartError",
    "Product",
    "ReferencePoint",
    "Rot2",
    "Rot3",
    "Scenario",
    "SimTrace",
    "Sphere2",
    "Surface",
    "SurfaceFit",
    "SurfaceModel",
    "TrackingLostError",
    "a_matrix",
    "build_condensed",
    "error_state",
    "fd_error_jacobians",
    "fit_surface",
    "fit_surface_window",
    "linearize",
    "load_surface_samples",
    "metrics",
    "mpc_step",
    "rollout",
    "sample_surface",
    "save_surface_samples",
    "skew",
    "so2_exp",
    "so2_log",
    "so3_exp",
    "so3_log",
    "solve_box_qp",
    "solve_unconstrained",
    "step",
]
