import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellmax.expansions import (
    RegimeMismatchError,
    bracket_boundary,
    bracket_degenerate,
    example_delta_beta,
    example_inputs,
    expansion_result,
    q_theorem1,
)
from ellmax.limits import EvalPoint, boundary_point, classify_regime

GRID = np.linspace(-2.5, -0.1, 5)


def _at(inp, x, y, lam=None, **changes):
    lam = inp.lam if lam is None else lam
    return dataclasses.replace(inp, lam=lam, point=EvalPoint(x, y, classify_regime(x, y, lam)), **changes)


@pytest.fixture(scope="module")
def base():
    return example_inputs(2, 1, -1.0, -1.0, 10**5)


@pytest.mark.parametrize("x", GRID)
@pytest.mark.parametrize("y", GRID)
def test_generic_matches_closed_form(x, y):
    n = 10**5
    generic = expansion_result(example_inputs(2, 1, x, y, n)).delta_pred
    assert abs(generic - example_delta_beta(2, 1, x, y, n)) <= 1e-10


def test_closed_form_other_parameters():
    for a, b, x, y in ((3, 2, -1.0, -0.6), (1, 1, -0.8, -1.4), (2, 0.5, -0.3, -0.35)):
        generic = expansion_result(example_inputs(a, b, x, y, 10**4)).delta_pred
        assert example_delta_beta(a, b, x, y, 10**4) == pytest.approx(generic, rel=1e-9, abs=1e-14)


def test_printed_coefficient_departs_from_oracle(beta21, example_rule):
    from ellmax.oracle import maxima_cdf_exact

    n, x, y = 10**5, -1.0, -0.6
    res = expansion_result(example_inputs(2, 1, x, y, n))
    exact = maxima_cdf_exact(beta21, example_rule, n, x, y)
    delta = res.h * math.expm1(exact.log_maxima_cdf - math.log(res.h))
    assert delta / example_delta_beta(2, 1, x, y, n) == pytest.approx(1.0, abs=5e-3)
    assert abs(delta / example_delta_beta(2, 1, x, y, n, as_printed=True) - 1.0) > 0.2


@settings(max_examples=40, deadline=None)
@given(st.floats(-3.0, -0.05), st.floats(-3.0, -0.05))
def test_swap_symmetry(x, y):
    d1 = expansion_result(example_inputs(2, 1, x, y, 10**5)).delta_pred
    d2 = expansion_result(example_inputs(2, 1, y, x, 10**5)).delta_pred
    assert d1 == pytest.approx(d2, rel=1e-9, abs=1e-16)


def test_q_vanishes_with_small_parameters(base):
    tiny = dataclasses.replace(base, a_n=0.0, c_n=0.0, A_val=0.0)
    assert q_theorem1(tiny) == 0.0
    res = expansion_result(dataclasses.replace(tiny, n=10**15))
    assert abs(res.bracket) < 1e-14


def test_q_theorem1_rejects_non_interior(base):
    x, y = boundary_point("near", base.lam, x=-0.2)
    with pytest.raises(RegimeMismatchError):
        q_theorem1(_at(base, x, y))
    with pytest.raises(RegimeMismatchError):
        bracket_boundary(base)
    with pytest.raises(RegimeMismatchError):
        bracket_degenerate(base)


def test_interior_degenerates_to_boundary(base):
    x, y = boundary_point("near", base.lam, x=-0.2)
    target = bracket_boundary(_at(base, x, y))
    gaps = []
    for eps in (1e-2, 1e-3, 1e-4):
        inner = _at(base, x, y * (1 + eps))
        assert inner.point.regime.label.value == "Interior"
        gaps.append(abs(q_theorem1(inner) + expansion_result(inner).penalty_term - target))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 1e-3 * abs(target)


def test_near_boundary_unit_x_block_vanishes():
    lam = 1.0
    x, y = boundary_point("near", lam, x=-1.0)
    inp = _at(example_inputs(2, 1, -1, -1, 10**4), x, y, lam=lam, A_val=0.0, rate_k=1.0)
    assert inp.point.regime.label.value == "BoundaryNear"
    # with A = 0 the x block carries only a_n (|x| - 1), which is zero at x = -1
    y_only = _at(inp, -1.0 - 1e-9, y, lam=math.inf)
    q_y = expansion_result(_at(inp, -1.0, y, lam=math.inf)).q_term
    assert expansion_result(y_only).q_term == pytest.approx(q_y, rel=1e-6)
    pen = -0.5 / inp.n * (1.0 + (-y) ** 1.5) ** 2
    assert bracket_boundary(inp) == pytest.approx(q_y + pen, rel=1e-12)


def test_far_x_penalty_at_unit_x(base):
    y_far = -((1.0 - math.sqrt(2.0) * base.lam) ** 2)
    inp = _at(base, -1.0, y_far)
    assert inp.point.regime.label.value == "BoundaryFarX"
    assert expansion_result(inp).penalty_term == pytest.approx(-0.5 / base.n, rel=1e-14)


def test_lambda_zero_unit_point(base):
    inp = _at(base, -1.0, -1.0, lam=0.0, A_val=0.0)
    assert bracket_degenerate(inp) == pytest.approx(-0.5 / inp.n, rel=1e-12)


def test_lambda_inf_matches_near_form(base):
    x, y = -0.7, -1.3
    inf_inp = _at(base, x, y, lam=math.inf, rate_k=1.0)
    near = expansion_result(inf_inp)
    assert near.h == pytest.approx(math.exp(-(0.7**1.5) - 1.3**1.5))
    assert near.penalty_term == pytest.approx(-0.5 / base.n * (0.7**1.5 + 1.3**1.5) ** 2)


def test_exterior_penalty_uses_clamped_psi(base):
    inp = _at(base, -0.05, -0.05)
    assert inp.point.regime.label.value == "ExteriorBoth"
    res = expansion_result(inp)
    assert res.penalty_term == pytest.approx(-0.5 / base.n * (2 * 0.05**1.5) ** 2)
    assert res.delta_pred == pytest.approx(res.h * res.bracket)


def test_result_fields_are_floats(base):
    res = expansion_result(base)
    assert all(type(v) is float for v in dataclasses.astuple(res))
