"""Dirichlet eigenvalues of geodesic balls in CP^m and the Kaehler Bochner identity."""

from .boundary import BoundaryReport, GeodesicBall, classify_ball, convexity_threshold, relaxed_threshold
from .geometry import DomainError, ProjectiveModel
from .sturm import EigenResult, RadialProblem, SolverConfig, build_radial_problem, solve_fd, solve_shooting, sweep

__all__ = [
    "BoundaryReport",
    "DomainError",
    "EigenResult",
    "GeodesicBall",
    "ProjectiveModel",
    "RadialProblem",
    "SolverConfig",
    "build_radial_problem",
    "classify_ball",
    "convexity_threshold",
    "relaxed_threshold",
    "solve_fd",
    "solve_shooting",
    "sweep",
]
