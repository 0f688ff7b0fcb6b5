"""Convexity and pseudoconvexity of geodesic balls in CP^m.

Near the boundary sphere the unit normal is ``grad r``, so boundary Hessians of
the defining function are read off the spectrum of ``Hess r``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .geometry import HALF_PI, DomainError, ProjectiveModel, hess_r_spectrum

QUARTER_PI = 0.25 * math.pi


@dataclass(frozen=True)
class GeodesicBall:
    model: ProjectiveModel
    r0: float

    def __post_init__(self) -> None:
        r0 = float(self.r0)
        if not 0.0 < r0 < HALF_PI:
            raise DomainError(f"ball radius must lie in (0, pi/2), got {self.r0!r}")
        object.__setattr__(self, "r0", r0)

    @property
    def m(self) -> int:
        return self.model.m

    @property
    def boundary_area(self) -> float:
        return self.model.sphere_constant * math.sin(self.r0) ** (2 * self.m - 1) * math.cos(self.r0)


@dataclass(frozen=True)
class BoundaryReport:
    """Boundary quantities of a geodesic ball.

    ``levi_trace`` uses the unit-normal normalization (Hess r on the Levi
    distribution). With the defining function ``r^2 - r0^2`` every Levi
    eigenvalue picks up a factor ``2 r0``; :meth:`to_dict` reports both.

    For m = 1 the Levi distribution is zero-dimensional and
    ``strongly_pseudoconvex`` is reported as true on the whole range.
    """

    m: int
    r0: float
    principal_tangential: float
    principal_hopf: float
    levi_trace: float
    relaxed_value: float
    convex: bool
    strongly_pseudoconvex: bool
    relaxed_holds: bool

    def to_dict(self) -> dict:
        out = asdict(self)
        out["levi_eigenvalue_unit_normal"] = self.principal_tangential
        out["levi_eigenvalue_rho"] = 2.0 * self.r0 * self.principal_tangential
        out["levi_trace_rho"] = 2.0 * self.r0 * self.levi_trace
        out["conventions"] = {
            "levi_trace": "trace of Hess r on the Levi distribution (unit normal grad r)",
            "levi_trace_rho": "same trace for the defining function rho = r^2 - r0^2 (factor 2 r0)",
            "relaxed_value": "(2m-2) cot r0 + 4 cot 2r0; the eigenvalue bound needs it >= 0",
            "convex": "all principal curvatures >= 0 (non-strict)",
            "strongly_pseudoconvex": "Levi form positive definite; vacuously true for m = 1",
        }
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def relaxed_value(model: ProjectiveModel, r0: float) -> float:
    """Boundary integrand ``(2m-2) cot r0 + 4 cot 2r0`` of the relaxed condition."""
    spec = hess_r_spectrum(model, r0)
    return spec.tangential_multiplicity * spec.tangential + 2.0 * spec.hopf


def classify_ball(ball: GeodesicBall) -> BoundaryReport:
    spec = hess_r_spectrum(ball.model, ball.r0)
    mult = spec.tangential_multiplicity
    relaxed = mult * spec.tangential + 2.0 * spec.hopf
    # exact threshold comparisons keep the boundary radii on the closed side
    convex = ball.r0 <= QUARTER_PI
    relaxed_holds = ball.r0 <= relaxed_threshold(ball.model)
    return BoundaryReport(
        m=ball.m,
        r0=ball.r0,
        principal_tangential=spec.tangential,
        principal_hopf=spec.hopf,
        levi_trace=mult * spec.tangential,
        relaxed_value=relaxed,
        convex=convex,
        strongly_pseudoconvex=spec.tangential > 0.0,
        relaxed_holds=relaxed_holds,
    )


def relaxed_threshold(model: ProjectiveModel) -> float:
    """Radius where the relaxed boundary condition changes sign: ``arctan sqrt(m)``."""
    return math.atan(math.sqrt(model.m))


def convexity_threshold(model: ProjectiveModel) -> float:
    """Largest convex radius; the Hopf curvature ``2 cot 2r0`` vanishes at pi/4 for every m."""
    return QUARTER_PI
