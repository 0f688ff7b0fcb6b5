import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fubini_spec.geometry import (
    DomainError,
    ProjectiveModel,
    curvature_operator,
    curvature_operator_matrix,
    hess_r_spectrum,
    jacobi_field,
    radial_drift,
    volume_density,
)
from oracles import central_diff, second_diff


def test_model_constants():
    model = ProjectiveModel(3)
    assert model.n == 6
    assert model.k == 8.0
    assert model.diameter == math.pi / 2
    assert ProjectiveModel(1).sphere_constant == pytest.approx(2 * math.pi)
    assert ProjectiveModel(2).sphere_constant == pytest.approx(2 * math.pi**2)


@pytest.mark.parametrize("bad", [0, -1, 1.5, True])
def test_model_rejects_bad_dimension(bad):
    with pytest.raises(ValueError):
        ProjectiveModel(bad)


def test_curvature_operator_examples():
    model = ProjectiveModel(2)
    assert curvature_operator(model, 1, 0, 0) == (0, 0, 0)
    assert curvature_operator(model, 0, 1, 0) == (0, 4, 0)
    assert curvature_operator(model, 0, 0, 1) == (0, 0, 1)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_curvature_operator_spectrum(m):
    eig = np.sort(np.linalg.eigvalsh(curvature_operator_matrix(ProjectiveModel(m))))
    expected = np.sort([0.0, 4.0] + [1.0] * (2 * m - 2))
    assert np.array_equal(eig, expected)


@given(
    st.tuples(*[st.floats(-10, 10)] * 3),
    st.tuples(*[st.floats(-10, 10)] * 3),
    st.floats(-5, 5),
)
def test_curvature_operator_linear(a, b, s):
    model = ProjectiveModel(2)
    lhs = curvature_operator(model, *(x + s * y for x, y in zip(a, b)))
    rhs = [x + s * y for x, y in zip(curvature_operator(model, *a), curvature_operator(model, *b))]
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_jacobi_field_examples():
    model = ProjectiveModel(2)
    assert jacobi_field(model, "generic", 0.0) == 0.0
    assert jacobi_field(model, "hopf", math.pi / 4) == pytest.approx(1.0, abs=1e-15)
    assert jacobi_field(model, "generic", math.pi / 6) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("kind,curv", [("generic", 1.0), ("hopf", 4.0)])
def test_jacobi_equation(kind, curv):
    model = ProjectiveModel(2)
    f = lambda r: jacobi_field(model, kind, r)
    for r in np.linspace(0.05, 1.5, 30):
        assert abs(second_diff(f, r) + curv * f(r)) <= 1e-6


@pytest.mark.parametrize("r", [-0.1, math.pi / 2, 2.0])
def test_jacobi_domain(r):
    with pytest.raises(DomainError):
        jacobi_field(ProjectiveModel(1), "generic", r)


def test_hess_r_spectrum_examples():
    s = hess_r_spectrum(ProjectiveModel(2), math.pi / 4)
    assert s.tangential == pytest.approx(1.0)
    assert s.tangential_multiplicity == 2
    assert s.hopf == 0.0
    assert s.radial == 0.0
    s = hess_r_spectrum(ProjectiveModel(3), math.pi / 6)
    assert s.tangential == pytest.approx(math.sqrt(3), rel=1e-12)
    assert s.tangential_multiplicity == 4
    assert s.hopf == pytest.approx(2 / math.sqrt(3), rel=1e-12)
    s = hess_r_spectrum(ProjectiveModel(1), math.pi / 3)
    assert s.tangential_multiplicity == 0
    assert s.hopf == pytest.approx(-1.1547005, abs=1e-7)


def test_hess_r_sign_pattern():
    model = ProjectiveModel(3)
    for r in np.linspace(0.01, math.pi / 2 - 0.01, 100):
        s = hess_r_spectrum(model, r)
        assert s.tangential > 0
        assert (s.hopf > 0) == (r < math.pi / 4)


def test_radial_direction_decouples():
    # Hess r(Jn, n) = 0: the frame is orthogonal and grad r has eigenvalue 0
    s = hess_r_spectrum(ProjectiveModel(3), 1.1)
    assert s.bilinear(s.j_normal(), s.normal()) == 0.0
    assert s.bilinear(s.normal(), s.normal()) == 0.0
    assert s.bilinear(s.j_normal(), s.j_normal()) == s.hopf


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_trace_identity(m):
    model = ProjectiveModel(m)
    rng = np.random.default_rng(m)
    for r in rng.uniform(0.01, math.pi / 2 - 0.01, 100):
        s = hess_r_spectrum(model, r)
        assert abs((2 * m - 2) / math.tan(r) + 2 / math.tan(2 * r) - radial_drift(model, r)) <= 1e-12
        assert s.trace == pytest.approx(radial_drift(model, r), abs=1e-12)


def test_radial_drift_examples():
    assert radial_drift(ProjectiveModel(1), math.pi / 4) == pytest.approx(0.0, abs=1e-15)
    assert radial_drift(ProjectiveModel(2), math.pi / 4) == pytest.approx(2.0, abs=1e-15)
    model = ProjectiveModel(2)
    fd = central_diff(lambda r: math.log(volume_density(model, r)), 0.3)
    assert radial_drift(model, 0.3) == pytest.approx(9.388848, abs=1e-6)
    assert radial_drift(model, 0.3) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_density_consistency(m):
    model = ProjectiveModel(m)
    for r in np.linspace(0.05, 1.5, 40):
        fd = central_diff(lambda t: math.log(volume_density(model, t)), r, 1e-5)
        assert fd == pytest.approx(radial_drift(model, r), rel=1e-6)


def test_volume_density_examples():
    assert volume_density(ProjectiveModel(1), math.pi / 4) == pytest.approx(0.5)
    assert volume_density(ProjectiveModel(2), math.pi / 4) == pytest.approx(0.25)
    assert volume_density(ProjectiveModel(1), 1e-6) / 1e-6 == pytest.approx(1.0, rel=1e-9)
    r = np.linspace(0.01, 1.56, 50)
    assert np.all(volume_density(ProjectiveModel(3), r) > 0)


def test_vectorized_domain_check():
    with pytest.raises(DomainError):
        radial_drift(ProjectiveModel(1), np.array([0.5, 0.0]))
    with pytest.raises(DomainError):
        volume_density(ProjectiveModel(1), math.pi / 2)
