import json
import math

import numpy as np
import pytest

from fubini_spec.boundary import (
    GeodesicBall,
    classify_ball,
    convexity_threshold,
    relaxed_threshold,
    relaxed_value,
)
from fubini_spec.geometry import DomainError, ProjectiveModel
from oracles import relaxed_threshold_bisect


def ball(m, r0):
    return GeodesicBall(ProjectiveModel(m), r0)


@pytest.mark.parametrize("r0", [0.0, -0.2, math.pi / 2, 3.0])
def test_ball_radius_validated(r0):
    with pytest.raises(DomainError):
        ball(1, r0)


def test_classify_examples():
    rep = classify_ball(ball(1, math.pi / 6))
    assert rep.convex and rep.strongly_pseudoconvex and rep.relaxed_holds
    assert rep.relaxed_value == pytest.approx(4 / math.tan(math.pi / 3))
    assert rep.relaxed_value == pytest.approx(2.3094, abs=1e-4)

    rep = classify_ball(ball(1, math.pi / 3))
    assert not rep.convex
    assert rep.strongly_pseudoconvex

    rep = classify_ball(ball(1, math.pi / 4))
    assert rep.convex
    assert rep.principal_hopf == 0.0
    assert rep.relaxed_value == 0.0


def test_report_fields_and_json():
    rep = classify_ball(ball(3, 0.7))
    assert rep.principal_tangential == pytest.approx(1 / math.tan(0.7))
    assert rep.principal_hopf == pytest.approx(2 / math.tan(1.4))
    assert rep.levi_trace == pytest.approx(4 / math.tan(0.7))
    data = json.loads(rep.to_json())
    for key in (
        "principal_tangential",
        "principal_hopf",
        "levi_trace",
        "relaxed_value",
        "convex",
        "strongly_pseudoconvex",
        "relaxed_holds",
    ):
        assert key in data
    assert data["levi_eigenvalue_rho"] == pytest.approx(2 * 0.7 / math.tan(0.7))


@pytest.mark.parametrize("m,expected", [(1, 0.7853982), (2, 0.9553166), (4, 1.1071487)])
def test_relaxed_threshold_examples(m, expected):
    value = relaxed_threshold(ProjectiveModel(m))
    assert value == pytest.approx(expected, abs=1e-7)
    assert value == pytest.approx(relaxed_threshold_bisect(m), abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_relaxed_value_vanishes_at_threshold(m):
    model = ProjectiveModel(m)
    assert abs(relaxed_value(model, relaxed_threshold(model))) <= 1e-12


def test_convexity_threshold():
    assert convexity_threshold(ProjectiveModel(1)) == math.pi / 4
    assert convexity_threshold(ProjectiveModel(5)) == math.pi / 4
    assert not classify_ball(ball(3, math.pi / 4 + 0.01)).convex


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_classification_grid(m):
    model = ProjectiveModel(m)
    grid = np.linspace(0.005, math.pi / 2 - 0.005, 200)
    step = grid[1] - grid[0]
    thr = relaxed_threshold(model)
    for r0 in grid:
        rep = classify_ball(GeodesicBall(model, r0))
        if rep.convex:
            assert rep.relaxed_holds
        assert rep.principal_tangential > 0 and rep.strongly_pseudoconvex
        # the sign of the closed form agrees with the threshold away from it
        if abs(r0 - thr) > step:
            assert rep.relaxed_holds == (rep.relaxed_value >= 0)
            assert rep.relaxed_holds == (r0 < thr)


def test_threshold_ordering():
    for m in range(1, 6):
        model = ProjectiveModel(m)
        assert convexity_threshold(model) <= relaxed_threshold(model)
        assert (convexity_threshold(model) == pytest.approx(relaxed_threshold(model), abs=1e-15)) == (m == 1)
