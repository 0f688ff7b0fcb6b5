"""Finite-difference checks of the Hessian decomposition on CP^m in affine coordinates.

The Fubini-Study metric is ``g_{p qbar} = d_p d_qbar log(1 + |z|^2)`` on the
standard chart and the Riemannian metric is ``Re(xi^T g conj(eta))`` for real
tangent vectors with complex components ``xi``, ``eta``. With this
normalization the distance to the origin is ``arctan |z|`` and the holomorphic
sectional curvature is 4.

Real coordinates are ordered ``(Re z_1, ..., Re z_m, Im z_1, ..., Im z_m)``;
the complex structure acts as ``J(a, b) = (-b, a)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .geometry import DomainError, ProjectiveModel, radial_drift

ScalarField = Callable[[np.ndarray], float]

STEP = 1e-4
MAX_MODULUS = 10.0


def hermitian_metric(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    s = 1.0 + np.vdot(z, z).real
    return np.eye(len(z)) / s - np.outer(z.conj(), z) / s**2


def chern_christoffel(z: np.ndarray) -> np.ndarray:
    """``Gamma[r, p, q] = g^{r sbar} d_p g_{q sbar} = -(delta_rp zbar_q + delta_rq zbar_p) / (1 + |z|^2)``."""
    z = np.asarray(z, dtype=complex)
    m = len(z)
    s = 1.0 + np.vdot(z, z).real
    eye = np.eye(m)
    zb = z.conj()
    return -(eye[:, :, None] * zb[None, None, :] + eye[:, None, :] * zb[None, :, None]) / s


def complex_frame(m: int) -> np.ndarray:
    """Columns are real-coordinate vectors of ``d/dz_p = (d/dx_p - i d/dy_p) / 2``."""
    eye = np.eye(m)
    return 0.5 * np.vstack((eye, -1j * eye))


def j_matrix(m: int) -> np.ndarray:
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, -eye], [eye, zero]])


def real_metric(z: np.ndarray) -> np.ndarray:
    m = len(z)
    xi = np.hstack((np.eye(m), 1j * np.eye(m)))  # complex components of the real basis
    return (xi.T @ hermitian_metric(z) @ xi.conj()).real


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate((z.real, z.imag))


def to_complex(x: np.ndarray) -> np.ndarray:
    m = len(x) // 2
    return x[:m] + 1j * x[m:]


@dataclass(frozen=True)
class ChartPoint:
    z: np.ndarray
    metric: np.ndarray
    christoffel: np.ndarray

    @property
    def m(self) -> int:
        return len(self.z)

    @property
    def distance(self) -> float:
        """Geodesic distance to the origin, ``arctan |z|``."""
        return math.atan(float(np.linalg.norm(self.z)))

    @property
    def real_metric(self) -> np.ndarray:
        return real_metric(self.z)


def chart_point(z) -> ChartPoint:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.linalg.norm(z) > MAX_MODULUS:
        raise DomainError(f"|z| = {np.linalg.norm(z):.3g} is too close to the cut locus for differencing")
    return ChartPoint(z=z, metric=hermitian_metric(z), christoffel=chern_christoffel(z))


# -- finite differences ------------------------------------------------------


def _gradient(f: ScalarField, x: np.ndarray, h: float) -> np.ndarray:
    n = len(x)
    out = np.empty(n)
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        out[a] = (f(to_complex(x + e)) - f(to_complex(x - e))) / (2 * h)
    return out


def _second_partials(f: ScalarField, x: np.ndarray, h: float) -> np.ndarray:
    n = len(x)
    out = np.empty((n, n))
    f0 = f(to_complex(x))
    basis = np.eye(n) * h
    for a in range(n):
        ea = basis[a]
        out[a, a] = (f(to_complex(x + ea)) - 2 * f0 + f(to_complex(x - ea))) / (h * h)
        for b in range(a + 1, n):
            eb = basis[b]
            v = (
                f(to_complex(x + ea + eb))
                - f(to_complex(x + ea - eb))
                - f(to_complex(x - ea + eb))
                + f(to_complex(x - ea - eb))
            ) / (4 * h * h)
            out[a, b] = out[b, a] = v
    return out


def _richardson(fn, h: float, refine: bool):
    coarse = fn(h)
    if not refine:
        return coarse
    return (4.0 * fn(0.5 * h) - coarse) / 3.0


def real_christoffel(z: np.ndarray, h: float = STEP, refine: bool = False) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[c, a, b]`` from central differences of the real metric."""
    x = to_real(z)
    n = len(x)

    def dmetric(step):
        out = np.empty((n, n, n))
        for a in range(n):
            e = np.zeros(n)
            e[a] = step
            out[a] = (real_metric(to_complex(x + e)) - real_metric(to_complex(x - e))) / (2 * step)
        return out

    dg = _richardson(dmetric, h, refine)  # dg[a, b, d] = d_a G_bd
    ginv = np.linalg.inv(real_metric(z))
    # lowered[a, b, d] = 1/2 (d_a G_bd + d_b G_ad - d_d G_ab)
    lowered = 0.5 * (dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0)))
    return np.einsum("cd,abd->cab", ginv, lowered)


def riemannian_hessian(point: ChartPoint, f: ScalarField, h: float = STEP, refine: bool = False) -> np.ndarray:
    """``Hess f = d^2 f - Gamma df`` in real coordinates."""
    x = to_real(point.z)
    d2 = _richardson(lambda s: _second_partials(f, x, s), h, refine)
    df = _richardson(lambda s: _gradient(f, x, s), h, refine)
    gamma = real_christoffel(point.z, h, refine)
    return d2 - np.einsum("cab,c->ab", gamma, df)


def hessian_split(
    point: ChartPoint, f: ScalarField, h: float = STEP, refine: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """J-invariant and J-anti-invariant parts ``(H1, H2)`` of the Riemannian Hessian.

    ``H1(A, B) = (Hess(A, B) + Hess(JA, JB)) / 2`` and ``H2 = Hess - H1``.
    """
    hess = riemannian_hessian(point, f, h, refine)
    J = j_matrix(point.m)
    rotated = J.T @ hess @ J
    return 0.5 * (hess + rotated), 0.5 * (hess - rotated)


def levi_form_matrix(point: ChartPoint, f: ScalarField, h: float = STEP, refine: bool = False) -> np.ndarray:
    """``d_p d_qbar f`` from real second partials (no connection involved)."""
    x = to_real(point.z)
    d2 = _richardson(lambda s: _second_partials(f, x, s), h, refine)
    zeta = complex_frame(point.m)
    return zeta.T @ d2 @ zeta.conj()


def _holomorphic_hessian(point: ChartPoint, f: ScalarField, h: float, refine: bool) -> np.ndarray:
    """``d_p d_q f - Gamma^r_pq d_r f`` with the closed-form Chern symbols."""
    x = to_real(point.z)
    d2 = _richardson(lambda s: _second_partials(f, x, s), h, refine)
    df = _richardson(lambda s: _gradient(f, x, s), h, refine)
    zeta = complex_frame(point.m)
    dzz = zeta.T @ d2 @ zeta
    dz = zeta.T @ df
    return dzz - np.einsum("rpq,r->pq", point.christoffel, dz)


def random_tangent_vectors(point: ChartPoint, count: int, rng: np.random.Generator) -> np.ndarray:
    """Rows are real tangent vectors of unit length in the metric."""
    G = point.real_metric
    v = rng.normal(size=(count, 2 * point.m))
    norms = np.sqrt(np.einsum("ia,ab,ib->i", v, G, v))
    return v / norms[:, None]


@dataclass
class IdentityReport:
    """Maximum violation of each Hessian identity over the sampled tangent pairs."""

    decomposition: float
    h1_j_invariant: float
    h2_j_anti_invariant: float
    levi_form: float
    complex_hessian: float
    trials: int
    refined: bool = False
    z: list = field(default_factory=list)

    @property
    def worst(self) -> float:
        return max(
            self.decomposition, self.h1_j_invariant, self.h2_j_anti_invariant, self.levi_form, self.complex_hessian
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["worst"] = self.worst
        return out


def _identity_violations(point, f, trials, seed, h, refine) -> IdentityReport:
    rng = np.random.default_rng(seed)
    m = point.m
    J = j_matrix(m)
    hess = riemannian_hessian(point, f, h, refine)
    rotated = J.T @ hess @ J
    H1, H2 = 0.5 * (hess + rotated), 0.5 * (hess - rotated)
    levi = levi_form_matrix(point, f, h, refine)
    hol = _holomorphic_hessian(point, f, h, refine)
    zeta = complex_frame(m)
    a_vecs = random_tangent_vectors(point, trials, rng)
    b_vecs = random_tangent_vectors(point, trials, rng)

    dec = jinv = janti = levi_err = 0.0
    for A, B in zip(a_vecs, b_vecs):
        JA, JB = J @ A, J @ B
        dec = max(dec, abs(A @ H1 @ B + A @ H2 @ B - A @ hess @ B))
        jinv = max(jinv, abs(JA @ H1 @ JB - A @ H1 @ B))
        janti = max(janti, abs(JA @ H2 @ JB + A @ H2 @ B))
        alpha, beta = to_complex(A), to_complex(B)
        # i d dbar f (A, B) = i sum F_{p qbar} (alpha^p conj(beta^q) - beta^p conj(alpha^q))
        form = 1j * (alpha @ levi @ beta.conj() - beta @ levi @ alpha.conj())
        levi_err = max(levi_err, abs(JA @ H1 @ B - form.real), abs(form.imag))
    h2_complex = zeta.T @ H2 @ zeta
    hol_err = float(np.max(np.abs(h2_complex - hol)))
    return IdentityReport(
        decomposition=float(dec),
        h1_j_invariant=float(jinv),
        h2_j_anti_invariant=float(janti),
        levi_form=float(levi_err),
        complex_hessian=hol_err,
        trials=trials,
        refined=refine,
        z=[[c.real, c.imag] for c in point.z],
    )


def verify_identities(
    point: ChartPoint,
    f: ScalarField,
    trials: int = 100,
    seed: int = 0,
    h: float = STEP,
    tolerance: float = 1e-6,
) -> IdentityReport:
    """Check the four Hessian-decomposition identities at one point.

    (a) ``H1(JA, JB) = H1(A, B)``; (b) ``H2(JA, JB) = -H2(A, B)``;
    (c) ``H1(JA, B) = i d dbar f (A, B)``; (d) the complex components of
    ``H2`` equal ``d_p d_q f - Gamma^r_pq d_r f``. A marginal failure (within
    a factor 100 of ``tolerance``) is retried with one Richardson step.
    """
    report = _identity_violations(point, f, trials, seed, h, refine=False)
    if tolerance < report.worst <= 100 * tolerance:
        report = _identity_violations(point, f, trials, seed, h, refine=True)
    return report


def gaussian_curvature(z: complex, h: float = STEP) -> float:
    """Curvature of CP^1 at ``z`` from the conformal factor: ``K = -Delta log(lam) / (2 lam)``."""
    x = to_real(np.array([z]))

    def log_factor(p):
        return math.log(real_metric(p)[0, 0])

    lap = np.trace(_second_partials(log_factor, x, h))
    return -lap / (2.0 * real_metric(np.array([z]))[0, 0])


def coordinate_laplacian(point: ChartPoint, f: ScalarField, h: float = STEP) -> float:
    """Trace of the Riemannian Hessian: the usual Laplacian with the sign of ``f'' + drift f'``."""
    return float(np.trace(np.linalg.solve(point.real_metric, riemannian_hessian(point, f, h))))


def radial_field(profile: Callable[[float], float]) -> ScalarField:
    """Lift a radial profile ``F(r)`` to the chart via ``r = arctan |z|``."""
    return lambda z: profile(math.atan(float(np.linalg.norm(z))))


def unit_radial_frame(point: ChartPoint) -> tuple[np.ndarray, np.ndarray]:
    """Unit normal ``n = grad r`` and ``J n`` at a point away from the origin."""
    x = to_real(point.z)
    G = point.real_metric
    n = x / math.sqrt(x @ G @ x)
    return n, j_matrix(point.m) @ n


# radial test profile sin^2 r, lifted exactly as |z|^2 / (1 + |z|^2)
def _sin2(z: np.ndarray) -> float:
    s = np.vdot(z, z).real
    return s / (1.0 + s)


def _sin2_profile(r):
    return np.sin(r) ** 2, np.sin(2 * r), 2 * np.cos(2 * r)


def radial_consistency(m: int, radii, h: float = STEP) -> dict:
    """Compare the coordinate Laplacian of ``sin^2 r`` with ``F'' + drift F'``.

    Points lie on the first coordinate axis rotated by a fixed phase. Keep
    radii below pi/4 (``|z| < 1``): beyond that the inverse metric amplifies
    rounding in the fixed-step differences.
    """
    model = ProjectiveModel(m)
    errors = []
    for r in np.asarray(radii, dtype=float):
        z = np.zeros(m, dtype=complex)
        z[0] = math.tan(r) * np.exp(0.3j)
        point = chart_point(z)
        _, d1, d2 = _sin2_profile(r)
        expected = d2 + radial_drift(model, r) * d1
        errors.append(abs(coordinate_laplacian(point, _sin2, h) - expected))
    return {"max_error": float(max(errors)), "points": len(errors)}


def _log_potential(z: np.ndarray) -> float:
    return math.log(1.0 + np.vdot(z, z).real)


def _mixed_field(z: np.ndarray) -> float:
    """A non-radial field with nonzero complex Hessian."""
    z1 = z[0]
    val = (z1**3).real + abs(z1) ** 2 * z1.imag
    if len(z) > 1:
        z2 = z[1]
        val += (z1 * z2).imag + abs(z2) ** 4 + (z1 * z2.conj()).real
    return float(val)


TEST_FIELDS: dict[str, ScalarField] = {"log_potential": _log_potential, "mixed": _mixed_field}


def tensor_report(m: int, trials: int = 100, seed: int = 0, points: int = 5, radial_points: int = 20) -> dict:
    """Run every coordinate check for complex dimension ``m`` and collect max violations."""
    rng = np.random.default_rng(seed)
    identities = {name: 0.0 for name in ("decomposition", "h1_j_invariant", "h2_j_anti_invariant", "levi_form", "complex_hessian")}
    for i in range(points):
        direction = rng.normal(size=m) + 1j * rng.normal(size=m)
        z = direction / np.linalg.norm(direction) * rng.uniform(0.05, 0.95)
        point = chart_point(z)
        for name, f in TEST_FIELDS.items():
            rep = verify_identities(point, f, trials=trials, seed=seed + i)
            for key in identities:
                identities[key] = max(identities[key], getattr(rep, key))
    out = {"m": m, "trials": trials, "seed": seed, "identities": identities}
    if m == 1:
        curv = [gaussian_curvature(complex(*rng.uniform(-0.7, 0.7, size=2))) for _ in range(20)]
        out["curvature"] = {"min": min(curv), "max": max(curv), "max_error": max(abs(c - 4.0) for c in curv)}
    out["radial_laplacian"] = radial_consistency(m, np.linspace(0.05, 0.75, radial_points))
    return out


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2)
