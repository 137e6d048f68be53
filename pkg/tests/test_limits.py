import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ellmax.limits import (
    AmbiguousRegimeError,
    EvalPoint,
    RegimeLabel,
    boundary_point,
    classify_regime,
    h_limit,
    standardized_args,
)

neg = st.floats(-6.0, -1e-3)
lams = st.floats(0.05, 5.0)
alphas = st.floats(0.1, 4.0)


def test_classify_interior():
    r = classify_regime(-2.0, -2.0, 1.0)
    assert r.label is RegimeLabel.INTERIOR
    assert r.D == pytest.approx(-3.0)


def test_classify_boundary_near():
    y = -((math.sqrt(2) - 1) ** 2)
    assert classify_regime(-1.0, y, 1.0).label is RegimeLabel.BOUNDARY_NEAR


def test_classify_exterior_both():
    assert classify_regime(-0.01, -0.01, 1.0).label is RegimeLabel.EXTERIOR_BOTH


@pytest.mark.parametrize(
    "branch, free, label",
    [
        ("near", {"x": -0.2}, RegimeLabel.BOUNDARY_NEAR),
        ("near", {"y": -0.3}, RegimeLabel.BOUNDARY_NEAR),
        ("far_y", {"x": -0.25}, RegimeLabel.BOUNDARY_FAR_Y),
        ("far_x", {"y": -0.4}, RegimeLabel.BOUNDARY_FAR_X),
    ],
)
def test_boundary_points_classify(branch, free, label):
    lam = 0.6
    x, y = boundary_point(branch, lam, **free)
    assert classify_regime(x, y, lam).label is label


def test_exterior_far_branches():
    lam = 0.6
    assert classify_regime(-0.3, -2.0, lam).label is RegimeLabel.EXTERIOR_Y_FAR
    assert classify_regime(-2.0, -0.3, lam).label is RegimeLabel.EXTERIOR_X_FAR


def test_degenerate_labels():
    assert classify_regime(-1, -1, 0.0).label is RegimeLabel.LAMBDA_ZERO
    assert classify_regime(-1, -1, math.inf).label is RegimeLabel.LAMBDA_INF
    assert RegimeLabel.LAMBDA_ZERO.is_degenerate
    assert RegimeLabel.BOUNDARY_FAR_X.is_boundary and RegimeLabel.EXTERIOR_BOTH.is_exterior


def test_classify_errors():
    with pytest.raises(ValueError):
        classify_regime(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        classify_regime(-1.0, -1.0, -1.0)
    with pytest.raises(ValueError):
        classify_regime(-1.0, -1.0, 1.0, boundary_tol=-1.0)
    # a loose tolerance admits a point far from every boundary curve
    with pytest.raises(AmbiguousRegimeError):
        classify_regime(-0.001, -0.001, 0.3, boundary_tol=0.1)
    with pytest.raises(ValueError):
        boundary_point("near", 0.5, x=-2.0)
    with pytest.raises(ValueError):
        boundary_point("diagonal", 0.5, x=-1.0)
    with pytest.raises(ValueError):
        EvalPoint(0.0, -1.0, classify_regime(-1, -1, 1.0))


def test_boundary_standardized_args_are_unit():
    for branch, free in (("near", {"x": -0.2}), ("far_y", {"x": -0.25}), ("far_x", {"y": -0.3})):
        x, y = boundary_point(branch, 0.6, **free)
        zx, zy = standardized_args(0.6, x, y)
        assert abs(abs(zx) - 1) < 1e-12 and abs(abs(zy) - 1) < 1e-12


def test_h_limit_degenerate_values():
    assert h_limit(1.0, 0.0, -1.0, -2.0) == pytest.approx(math.exp(-(2**1.5)))
    assert h_limit(1.0, math.inf, -1.0, -2.0) == pytest.approx(math.exp(-1 - 2**1.5))


@given(alphas, lams, neg, neg)
def test_h_limit_symmetric_and_bounded(alpha, lam, x, y):
    h = h_limit(alpha, lam, x, y)
    assert h == h_limit(alpha, lam, y, x)
    p = alpha + 0.5
    assert math.exp(-(abs(x) ** p) - abs(y) ** p) - 1e-14 <= h <= math.exp(-(abs(min(x, y)) ** p)) + 1e-14


@given(alphas, neg)
def test_h_limit_approaches_extremes(alpha, x):
    p = alpha + 0.5
    assert h_limit(alpha, 1e-8, x, x) == pytest.approx(math.exp(-(abs(x) ** p)), rel=1e-6)
    assert h_limit(alpha, 1e4, x, 2 * x) == pytest.approx(math.exp(-(abs(x) ** p) - abs(2 * x) ** p), rel=1e-6)


def test_h_limit_continuous_across_boundaries():
    lam, a = 0.6, 1.0
    for branch, free in (("near", {"x": -0.2}), ("far_y", {"x": -0.25}), ("far_x", {"y": -0.3})):
        x, y = boundary_point(branch, lam, **free)
        assert abs(h_limit(a, lam, x, y * (1 + 1e-7)) - h_limit(a, lam, x, y * (1 - 1e-7))) < 1e-6
