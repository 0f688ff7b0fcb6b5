import math

import numpy as np
import pytest

from fubini_spec import bochner, tensorlab
from fubini_spec.geometry import DomainError, ProjectiveModel, radial_drift
from fubini_spec.tensorlab import (
    chart_point,
    chern_christoffel,
    coordinate_laplacian,
    gaussian_curvature,
    hessian_split,
    radial_consistency,
    riemannian_hessian,
    unit_radial_frame,
    verify_identities,
)


def norm2(z):
    return float(np.vdot(z, z).real)


def test_constant_field_is_flat():
    p = chart_point(np.array([0.2 + 0.1j, -0.4j]))
    rep = verify_identities(p, lambda z: 3.0, trials=20)
    assert rep.worst == 0.0
    assert np.all(riemannian_hessian(p, lambda z: 3.0) == 0.0)


def test_split_closes_exactly():
    p = chart_point(np.array([0.5 - 0.2j]))
    hess = riemannian_hessian(p, tensorlab._mixed_field)
    H1, H2 = hessian_split(p, tensorlab._mixed_field)
    assert np.allclose(H1 + H2, hess, rtol=0, atol=1e-14)
    J = tensorlab.j_matrix(1)
    assert np.allclose(J.T @ H1 @ J, H1, atol=1e-12)
    assert np.allclose(J.T @ H2 @ J, -H2, atol=1e-12)


def test_linear_field_at_origin():
    p = chart_point(np.zeros(2, dtype=complex))
    rep = verify_identities(p, lambda z: z[0].real, trials=50)
    assert rep.worst <= 1e-9
    # Gamma vanishes at the origin, so the Hessian of a linear field is zero there
    assert np.max(np.abs(riemannian_hessian(p, lambda z: z[0].real))) <= 1e-8


def test_log_potential_identities():
    p = chart_point(np.array([0.3 + 0.2j, -0.1 + 0.4j]))
    rep = verify_identities(p, tensorlab._log_potential, trials=50, seed=3)
    assert rep.worst <= 1e-6
    assert rep.trials == 50


@pytest.mark.parametrize("m", [1, 2])
def test_radial_complex_hessian_matches_profile(m):
    z = np.zeros(m, dtype=complex)
    z[0] = 0.3 * np.exp(0.7j)
    p = chart_point(z)
    n, jn = unit_radial_frame(p)
    r = math.atan(0.3)
    t, sec2 = math.tan(r), 1.0 / math.cos(r) ** 2
    # |z|^2 = tan^2 r
    h = bochner.hessian_amplitude(r, 2 * t * sec2, 2 * sec2 * sec2 + 4 * t * t * sec2)
    _, H2 = hessian_split(p, norm2)
    assert n @ H2 @ n == pytest.approx(h / 2, abs=1e-7)
    assert jn @ H2 @ jn == pytest.approx(-h / 2, abs=1e-7)
    assert abs(n @ H2 @ jn) <= 1e-7
    # sin^2 r depends on cos 2r only, so its complex Hessian vanishes
    _, H2 = hessian_split(p, tensorlab._sin2)
    assert np.max(np.abs(H2)) <= 1e-7


def test_chern_symbols_against_metric_derivative():
    z = np.array([0.2 + 0.1j, -0.3j])
    gamma = chern_christoffel(z)
    H = tensorlab.hermitian_metric(z)
    eps = 1e-6
    # Gamma^r_pq = H^{r sbar} d_p H_{q sbar}; holomorphic d_p = (d_x - i d_y) / 2
    dH = []
    for p in range(2):
        e = np.zeros(2, dtype=complex)
        e[p] = eps
        dx = (tensorlab.hermitian_metric(z + e) - tensorlab.hermitian_metric(z - e)) / (2 * eps)
        dy = (tensorlab.hermitian_metric(z + 1j * e) - tensorlab.hermitian_metric(z - 1j * e)) / (2 * eps)
        dH.append(0.5 * (dx - 1j * dy))
    inv = np.linalg.inv(H)
    for p in range(2):
        for q in range(2):
            expected = (dH[p][q, :]) @ inv
            assert np.allclose(gamma[:, p, q], expected, atol=1e-8)


def test_curvature_is_four():
    for z in (0.0, 0.3 + 0.4j, -0.6j, 0.5 - 0.5j):
        assert gaussian_curvature(z) == pytest.approx(4.0, abs=1e-4)


def test_large_modulus_rejected():
    with pytest.raises(DomainError):
        chart_point(np.array([11.0 + 0j]))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_laplacian_of_radial_field(m):
    model = ProjectiveModel(m)
    for r in (0.2, 0.5, 0.7):
        z = np.zeros(m, dtype=complex)
        z[-1] = math.tan(r) * 1j
        f, d1, d2 = tensorlab._sin2_profile(r)
        got = coordinate_laplacian(chart_point(z), tensorlab._sin2)
        assert got == pytest.approx(d2 + radial_drift(model, r) * d1, abs=1e-6)
    assert radial_consistency(m, np.linspace(0.05, 0.75, 20))["max_error"] <= 1e-6


def test_tensor_report_shape():
    rep = tensorlab.tensor_report(1, trials=10, points=2, radial_points=5)
    assert set(rep) == {"m", "trials", "seed", "identities", "curvature", "radial_laplacian"}
    assert max(rep["identities"].values()) <= 1e-6
    assert "curvature" not in tensorlab.tensor_report(2, trials=5, points=1, radial_points=3)
