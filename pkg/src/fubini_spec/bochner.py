"""Integrated Bochner identity for radial Dirichlet eigenfunctions on CP^m balls.

For a real eigenfunction ``f`` of the dbar-Laplacian with eigenvalue ``lam`` on
a domain of an Einstein Kaehler manifold (``Ric = k g``) the Bochner formula on
``(0,1)``-forms integrates to the equality

    lam (lam - k) ||f||^2 = ||D'' dbar f||^2 + I,

with ``I = -int_{bdry} <D'' dbar f, nu^{0,1} (x) dbar f>``. For radial ``f = u(r)``
on a geodesic ball every term reduces to a one-dimensional integral:

* the only nonzero complex-Hessian amplitude is ``h = u'' - 2 u' cot 2r``,
  and ``||D'' dbar f||^2 = kappa * c_m * int h^2 w`` with ``kappa = 1/4``;
* ``I = (1/4) u'(r0)^2 [(2m-2) cot r0 + 4 cot 2r0] * area(r0)``.

``kappa`` is not hard-coded anywhere: :func:`calibrate_kappa` recovers it from
non-eigenfunction test functions, where the identity holds with ``lam`` terms
replaced by ``<dbar Delta phi, dbar phi>``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import cumulative_simpson, simpson

from .boundary import GeodesicBall, relaxed_value
from .geometry import ProjectiveModel, hess_r_spectrum, volume_density_unchecked
from .sturm import EigenResult

KAPPA = 0.25


class AuditFailure(RuntimeError):
    """Residual of the integrated identity exceeded its tolerance."""

    def __init__(self, audit: "BochnerAudit", tolerance: float):
        super().__init__(
            f"Bochner residual {audit.residual:.3e} exceeds {tolerance:.1e} x scale {audit.scale:.3e}: "
            + json.dumps(audit.to_dict())
        )
        self.audit = audit
        self.tolerance = tolerance


class CalibrationError(RuntimeError):
    pass


class DegenerateBoundaryWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BochnerAudit:
    lhs: float
    rigidity: float
    ricci_excess: float
    boundary_I: float
    residual: float
    i2: float
    norms: dict
    lambda_dbar: float
    k: float

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), self.rigidity, abs(self.boundary_I), self.k * self.norms["f"])

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / self.scale

    def to_dict(self) -> dict:
        out = asdict(self)
        out["scale"] = self.scale
        out["relative_residual"] = self.relative_residual
        return out


# -- sampled radial calculus -------------------------------------------------


def _uniform_step(r: np.ndarray) -> float:
    h = (r[-1] - r[0]) / (len(r) - 1)
    if len(r) < 9 or not np.allclose(np.diff(r), h, rtol=1e-9, atol=0.0) or r[0] != 0.0:
        raise ValueError("eigenfunction must be sampled on a uniform mesh from 0 with at least 8 cells")
    return h


def integrate(y: np.ndarray, r: np.ndarray) -> float:
    """Composite Simpson with one Richardson step (Boole's rule) when the cell count allows.

    The extra order matters for balls near the cut locus, where the
    eigenfunction has a logarithmic boundary layer.
    """
    n = len(r) - 1
    fine = float(simpson(y, x=r))
    if n % 4:
        return fine
    coarse = float(simpson(y[::2], x=r[::2]))
    return (16.0 * fine - coarse) / 15.0


def _drift(m: int, r: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return (2 * m - 1) / np.tan(r) - np.tan(r)


def flux_derivative(ball: GeodesicBall, r: np.ndarray, u: np.ndarray, lam_usual: float) -> np.ndarray:
    """``u'`` of a sampled eigenfunction from the integrated equation.

    Integrating ``-(w u')' = Lambda w u`` from the center gives
    ``u'(r) = -Lambda * int_0^r w u / w(r)``; only an integral of the samples
    is needed, which stays accurate inside the logarithmic boundary layer of
    balls close to the cut locus where differencing does not.
    """
    _uniform_step(r)
    w = volume_density_unchecked(ball.model, r)
    flux = cumulative_simpson(w * u, x=r, initial=0.0)
    du = np.zeros_like(r)
    du[1:] = -lam_usual * flux[1:] / w[1:]
    return du


def one_sided_slope(ball: GeodesicBall, r: np.ndarray, u: np.ndarray) -> float:
    """``u'(r0)`` from a third-order one-sided difference with ``u''(r0) = -drift u'(r0)``.

    Independent of :func:`flux_derivative`; kept as a cross-check.
    """
    h = _uniform_step(r)
    d = _drift(ball.m, np.array([ball.r0]))[0]
    u1, u2 = u[-2] - u[-1], u[-3] - u[-1]
    return -(8.0 * u1 - u2) / (6.0 * h + 2.0 * h * h * d)


def boundary_slope(ball: GeodesicBall, r: np.ndarray, u: np.ndarray, lam_usual: float) -> float:
    return float(flux_derivative(ball, r, u, lam_usual)[-1])


def _hessian_amplitude(m: int, r: np.ndarray, du: np.ndarray, u: np.ndarray, lam_usual: float) -> np.ndarray:
    out = np.zeros_like(r)
    pos = r > 0.0
    rp = r[pos]
    # u'' - 2u' cot 2r with u'' = -drift u' - Lambda u; drift + 2 cot 2r = 2m cot r - 2 tan r
    out[pos] = -du[pos] * (2 * m / np.tan(rp) - 2.0 * np.tan(rp)) - lam_usual * u[pos]
    return out


def hessian_amplitude(r, d1, d2):
    """``f'' - 2 f' cot 2r`` from given radial derivatives (any smooth radial f)."""
    r = np.asarray(r, dtype=float)
    return np.asarray(d2, dtype=float) - 2.0 * np.asarray(d1, dtype=float) * np.cos(2.0 * r) / np.sin(2.0 * r)


def complex_hessian_radial(ball: GeodesicBall, r: np.ndarray, u: np.ndarray, lam_usual: float) -> np.ndarray:
    """Amplitude ``h = u'' - 2 u' cot 2r`` of the complex Hessian of ``f = u(r)``.

    ``u''`` comes from the radial equation ``u'' = -drift u' - Lambda u``
    rather than from differencing twice, and ``u'`` from :func:`flux_derivative`,
    so ``u`` must be an eigenfunction for ``lam_usual``. ``h(0) = 0`` since the
    Hessian of a radial function is isotropic at the center.
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    du = flux_derivative(ball, r, u, lam_usual)
    return _hessian_amplitude(ball.m, r, du, u, lam_usual)


def rigidity_norm(ball: GeodesicBall, r: np.ndarray, h: np.ndarray, kappa: float = KAPPA) -> float:
    """``||D'' dbar f||^2 = kappa * c_m * int_0^r0 h^2 w``."""
    w = volume_density_unchecked(ball.model, r)
    return kappa * ball.model.sphere_constant * integrate(np.asarray(h) ** 2 * w, r)


def boundary_term_from_slope(ball: GeodesicBall, slope: float) -> float:
    """``I = (1/4) u'(r0)^2 [(2m-2) cot r0 + 4 cot 2r0] * area(r0)`` for an eigenfunction."""
    return 0.25 * slope * slope * relaxed_value(ball.model, ball.r0) * ball.boundary_area


def boundary_term(ball: GeodesicBall, r: np.ndarray, u: np.ndarray, lam_usual: float) -> float:
    """Boundary term of the integrated identity for a sampled Dirichlet eigenfunction.

    A vanishing normal derivative is flagged with :class:`DegenerateBoundaryWarning`;
    unique continuation rules it out for a genuine eigenfunction.
    """
    slope = boundary_slope(ball, np.asarray(r, dtype=float), np.asarray(u, dtype=float), lam_usual)
    if abs(slope) <= 1e-12 * max(np.max(np.abs(u)), 1e-300) / ball.r0:
        warnings.warn("normal derivative vanishes at the boundary", DegenerateBoundaryWarning, stacklevel=2)
    return boundary_term_from_slope(ball, slope)


def audit(ball: GeodesicBall, eig: EigenResult, kappa: float = KAPPA, tolerance: float | None = 1e-6) -> BochnerAudit:
    """Evaluate every term of the integrated identity for one eigenpair.

    ``residual = lam (lam - k) ||f||^2 - rigidity - boundary_I``. Raises
    :class:`AuditFailure` when ``|residual|`` exceeds ``tolerance`` times the
    largest term (pass ``tolerance=None`` to skip the check).
    """
    model = ball.model
    r, u = eig.r, eig.u
    lam = eig.lambda_dbar
    c = model.sphere_constant
    w = volume_density_unchecked(model, r)
    du = flux_derivative(ball, r, u, eig.lambda_usual)
    h = _hessian_amplitude(ball.m, r, du, u, eig.lambda_usual)

    f2 = c * integrate(u * u * w, r)
    df2 = 0.5 * c * integrate(du * du * w, r)
    rigidity = rigidity_norm(ball, r, h, kappa)
    slope = du[-1]
    if abs(slope) <= 1e-12 * np.max(np.abs(u)) / ball.r0:
        warnings.warn("normal derivative vanishes at the boundary", DegenerateBoundaryWarning, stacklevel=2)
    boundary_i = boundary_term_from_slope(ball, slope)
    lhs = lam * (lam - model.k) * f2

    # Hess f(Jn, n) = u' Hess r(Jn, n) on the boundary; zero for a radial profile
    spec = hess_r_spectrum(model, ball.r0)
    i2 = -0.5 * slope * slope * spec.bilinear(spec.j_normal(), spec.normal()) * ball.boundary_area + 0.0

    result = BochnerAudit(
        lhs=lhs,
        rigidity=rigidity,
        ricci_excess=0.0,
        boundary_I=boundary_i,
        residual=lhs - rigidity - boundary_i,
        i2=i2,
        norms={"f": f2, "dbar_f": df2, "rayleigh": df2 / f2},
        lambda_dbar=lam,
        k=model.k,
    )
    if tolerance is not None and result.relative_residual > tolerance:
        raise AuditFailure(result, tolerance)
    return result


# -- kappa calibration -------------------------------------------------------


@dataclass(frozen=True)
class CosineTestFunction:
    """``phi(r) = P(cos 2r) - P(cos 2r0)``: smooth, radial, vanishing at ``r0``."""

    coefficients: tuple[float, ...]
    r0: float

    def derivatives(self, r: np.ndarray) -> tuple[np.ndarray, ...]:
        """Values of phi, phi', phi'', phi''' with exact chain-rule derivatives."""
        p = Polynomial(self.coefficients)
        p1, p2, p3 = p.deriv(1), p.deriv(2), p.deriv(3)
        c = np.cos(2.0 * r)
        c1 = -2.0 * np.sin(2.0 * r)
        c2 = -4.0 * c
        c3 = -2.0 * c1 * 2.0  # 8 sin 2r
        phi = p(c) - p(math.cos(2.0 * self.r0))
        d1 = p1(c) * c1
        d2 = p2(c) * c1**2 + p1(c) * c2
        d3 = p3(c) * c1**3 + 3.0 * p2(c) * c1 * c2 + p1(c) * c3
        return phi, d1, d2, d3


def random_quartics(count: int, r0: float, seed: int = 0) -> list[CosineTestFunction]:
    rng = np.random.default_rng(seed)
    return [CosineTestFunction(tuple(rng.normal(size=5)), r0) for _ in range(count)]


def identity_terms(model: ProjectiveModel, phi: CosineTestFunction, n_cells: int = 4096) -> dict:
    """Terms of the integrated identity for a general radial test function.

    ``lhs = <dbar Delta phi, dbar phi> = (c_m / 4) int (L phi)' phi' w`` with the
    usual Laplacian ``L phi = -phi'' - drift phi'``; ``ricci = k ||dbar phi||^2``;
    ``boundary = -(1/4) phi'(r0) h(r0) area(r0)`` (only ``phi(r0) = 0`` is used);
    ``hessian = c_m int h^2 w`` so that ``rigidity = kappa * hessian``.
    """
    if n_cells % 2:
        raise ValueError("n_cells must be even")
    m, r0 = model.m, phi.r0
    c = model.sphere_constant
    r = np.linspace(0.0, r0, n_cells + 1)
    f, d1, d2, d3 = phi.derivatives(r)
    w = volume_density_unchecked(model, r)
    rp = r[1:]
    drift = (2 * m - 1) / np.tan(rp) - np.tan(rp)
    ddrift = -(2 * m - 1) / np.sin(rp) ** 2 - 1.0 / np.cos(rp) ** 2
    dlap = np.zeros_like(r)
    dlap[1:] = -d3[1:] - ddrift * d1[1:] - drift * d2[1:]
    h = np.zeros_like(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        h[1:] = d2[1:] - 2.0 * d1[1:] / np.tan(2.0 * rp)
    if abs(r0 - 0.25 * math.pi) < 1e-15:
        h[-1] = d2[-1]
    area = c * w[-1]
    return {
        "lhs": 0.25 * c * integrate(dlap * d1 * w, r),
        "ricci": model.k * 0.5 * c * integrate(d1 * d1 * w, r),
        "boundary": -0.25 * d1[-1] * h[-1] * area,
        "hessian": c * integrate(h * h * w, r),
    }


def kappa_estimate(model: ProjectiveModel, phi: CosineTestFunction, n_cells: int = 4096) -> float:
    t = identity_terms(model, phi, n_cells)
    return (t["lhs"] - t["ricci"] - t["boundary"]) / t["hessian"]


def calibrate_kappa(
    model: ProjectiveModel,
    test_functions,
    n_cells: int = 4096,
    spread_tolerance: float = 1e-6,
) -> float:
    """Recover the tensor-norm constant of ``||D'' dbar f||^2`` from test functions.

    Each test function yields an independent estimate; disagreement beyond
    ``spread_tolerance`` signals a normalization bug and raises
    :class:`CalibrationError`. Returns the mean estimate.
    """
    estimates = np.array([kappa_estimate(model, phi, n_cells) for phi in test_functions])
    if estimates.size == 0:
        raise ValueError("need at least one test function")
    spread = float(np.max(estimates) - np.min(estimates))
    if spread > spread_tolerance:
        raise CalibrationError(f"kappa estimates disagree by {spread:.3e}: {estimates.tolist()}")
    return float(np.mean(estimates))
