"""Closed-form geometry of complex projective space CP^m.

The Fubini-Study metric is normalized to holomorphic sectional curvature 4,
so the Ricci tensor is ``2(m+1) g`` and the diameter is ``pi/2``. All radial
quantities are measured from a fixed base point with the geodesic distance
``r`` in ``(0, pi/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HALF_PI = 0.5 * math.pi


class DomainError(ValueError):
    """Raised when a radius falls outside the admissible open interval."""


@dataclass(frozen=True)
class ProjectiveModel:
    """CP^m with the fixed Fubini-Study normalization."""

    m: int

    def __post_init__(self) -> None:
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ValueError(f"complex dimension must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def n(self) -> int:
        """Real dimension."""
        return 2 * self.m

    @property
    def k(self) -> float:
        """Einstein constant: Ric = k g."""
        return 2.0 * (self.m + 1)

    @property
    def diameter(self) -> float:
        return HALF_PI

    @property
    def sphere_constant(self) -> float:
        """Area of the unit (2m-1)-sphere, ``2 pi^m / (m-1)!``.

        Geodesic spheres of radius r have area ``sphere_constant * volume_density(r)``.
        """
        return 2.0 * math.pi**self.m / math.factorial(self.m - 1)


def _check_open(r, lo: float = 0.0, hi: float = HALF_PI) -> None:
    arr = np.asarray(r, dtype=float)
    if not np.all((arr > lo) & (arr < hi)):
        raise DomainError(f"radius must lie in ({lo}, {hi}), got {r!r}")


def curvature_operator(
    model: ProjectiveModel, r_component: float, ju_component: float, orth_component: float
) -> tuple[float, float, float]:
    """Apply ``R(u, .)u`` to a vector split along ``Ru``, ``RJu`` and ``(u, Ju)^perp``.

    The Jacobi operator of CP^m is diagonal in that splitting with eigenvalues
    0, 4 and 1 respectively.
    """
    return (0.0 * r_component, 4.0 * ju_component, 1.0 * orth_component)


def curvature_operator_matrix(model: ProjectiveModel) -> np.ndarray:
    """Matrix of ``R(u, .)u`` in a unitary frame ``u, Ju, v_1, Jv_1, ...``."""
    diag = np.ones(model.n)
    diag[0] = 0.0
    diag[1] = 4.0
    return np.diag(diag)


def jacobi_field(model: ProjectiveModel, kind: str, r):
    """Amplitude of the normal Jacobi field vanishing at the base point.

    ``kind="generic"`` is a direction orthogonal to the complex line of the
    geodesic (amplitude ``sin r``); ``kind="hopf"`` is the ``J gamma'``
    direction (amplitude ``sin 2r``).
    """
    arr = np.asarray(r, dtype=float)
    if not np.all((arr >= 0.0) & (arr < HALF_PI)):
        raise DomainError(f"radius must lie in [0, pi/2), got {r!r}")
    if kind == "generic":
        out = np.sin(arr)
    elif kind == "hopf":
        out = np.sin(2.0 * arr)
    else:
        raise ValueError(f"unknown Jacobi field kind {kind!r}")
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class HessRSpectrum:
    """Eigenvalues of the Hessian of the distance function at radius r.

    The adapted frame is ``v_1, Jv_1, ..., v_m, Jv_m`` with ``Jv_m = grad r``;
    ``v_m = -J grad r`` is the Hopf direction.
    """

    tangential: float
    hopf: float
    radial: float
    r: float
    m: int

    @property
    def tangential_multiplicity(self) -> int:
        return 2 * self.m - 2

    @property
    def trace(self) -> float:
        return self.tangential_multiplicity * self.tangential + self.hopf + self.radial

    def matrix(self) -> np.ndarray:
        """Diagonal matrix of Hess r in the adapted frame."""
        diag = np.full(2 * self.m, self.tangential)
        diag[-2] = self.hopf
        diag[-1] = self.radial
        return np.diag(diag)

    def bilinear(self, a, b) -> float:
        """Evaluate Hess r on two vectors given by adapted-frame coefficients."""
        return float(np.asarray(a, dtype=float) @ self.matrix() @ np.asarray(b, dtype=float))

    def normal(self) -> np.ndarray:
        """Frame coefficients of the unit normal ``n = grad r``."""
        e = np.zeros(2 * self.m)
        e[-1] = 1.0
        return e

    def j_normal(self) -> np.ndarray:
        """Frame coefficients of ``J n`` (``J^2 v_m = -v_m``)."""
        e = np.zeros(2 * self.m)
        e[-2] = -1.0
        return e


def hess_r_spectrum(model: ProjectiveModel, r: float) -> HessRSpectrum:
    _check_open(r)
    r = float(r)
    return HessRSpectrum(
        tangential=1.0 / math.tan(r),
        hopf=2.0 / math.tan(2.0 * r) if r != math.pi / 4 else 0.0,
        radial=0.0,
        r=r,
        m=model.m,
    )


def radial_drift(model: ProjectiveModel, r):
    """Laplacian of the distance function, ``(2m-1) cot r - tan r``.

    Vectorized over ``r``. This is also ``w'(r)/w(r)`` for the volume density.
    """
    _check_open(r)
    arr = np.asarray(r, dtype=float)
    out = (2 * model.m - 1) / np.tan(arr) - np.tan(arr)
    return float(out) if np.ndim(out) == 0 else out


def volume_density(model: ProjectiveModel, r):
    """Density ``sin^(2m-1)(r) cos(r)`` of geodesic spheres, up to ``sphere_constant``."""
    _check_open(r)
    arr = np.asarray(r, dtype=float)
    out = np.sin(arr) ** (2 * model.m - 1) * np.cos(arr)
    return float(out) if np.ndim(out) == 0 else out


def volume_density_unchecked(model: ProjectiveModel, r):
    """Same as :func:`volume_density` but also defined at the endpoints 0 and pi/2."""
    arr = np.asarray(r, dtype=float)
    return np.sin(arr) ** (2 * model.m - 1) * np.cos(arr)


def ball_volume_fraction(model: ProjectiveModel, r):
    """Closed-form antiderivative ``sin^(2m)(r) / (2m)`` of the volume density."""
    arr = np.asarray(r, dtype=float)
    return np.sin(arr) ** (2 * model.m) / (2 * model.m)


def sphere_area(model: ProjectiveModel, r) -> float:
    """Area of the geodesic sphere of radius r."""
    return model.sphere_constant * volume_density(model, r)
