import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from ellmax.specfun import (
    QuadratureError,
    QuadratureSpec,
    box_cox,
    c_alpha,
    integrate,
    log_gamma,
    psi_alpha,
    reg_inc_beta,
)

alphas = st.floats(min_value=0.05, max_value=6.0)


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (0.5, math.log(math.sqrt(math.pi))), (5.0, math.log(24.0))])
def test_log_gamma_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-14)


def test_log_gamma_domain():
    with pytest.raises(ValueError):
        log_gamma(0.0)


@given(st.floats(0.1, 8), st.floats(0.1, 8))
def test_reg_inc_beta_endpoints(a, b):
    assert reg_inc_beta(a, b, 0.0) == 0.0
    assert reg_inc_beta(a, b, 1.0) == 1.0


def test_reg_inc_beta_uniform():
    z = np.linspace(0, 1, 11)
    np.testing.assert_allclose(reg_inc_beta(1, 1, z), z, atol=1e-15)


def test_reg_inc_beta_rejects_bad_args():
    with pytest.raises(ValueError):
        reg_inc_beta(-1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        reg_inc_beta(1.0, 1.0, 1.5)


def test_integrate_constant_and_singular():
    assert integrate(np.ones_like, 0.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert integrate(lambda s: s**-0.5, 0.0, 1.0, lo_power=-0.5) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.7, 3.0])
def test_integrate_c_alpha_identity(alpha):
    quad = integrate(lambda s: (1 - s) ** alpha / np.sqrt(s), 0.0, 1.0, lo_power=-0.5, hi_power=alpha)
    assert quad == pytest.approx(c_alpha(alpha), rel=1e-10)


def test_integrate_matches_scipy_on_smooth_function():
    ref, _ = sp_integrate.quad(lambda s: math.exp(-s) * math.cos(3 * s), 0.0, 2.0, epsabs=1e-14)
    assert integrate(lambda s: np.exp(-s) * np.cos(3 * s), 0.0, 2.0) == pytest.approx(ref, rel=1e-12)


def test_integrate_full_output_and_empty_interval():
    val, err = integrate(np.sin, 0.0, math.pi, full_output=True)
    assert val == pytest.approx(2.0, rel=1e-13)
    assert 0 <= err < 1e-10
    assert integrate(np.sin, 1.0, 1.0) == 0.0


def test_integrate_reports_failure():
    with pytest.raises(QuadratureError):
        integrate(lambda s: np.sign(s - 1 / 3), 0.0, 1.0, QuadratureSpec(abs_tol=1e-300, rel_tol=1e-300, max_depth=3))
    with pytest.raises(ValueError):
        integrate(np.sin, 1.0, 0.0)


def test_c_alpha_values():
    assert c_alpha(1.0) == pytest.approx(4 / 3, rel=1e-14)
    assert c_alpha(0.5) == pytest.approx(math.pi / 2, rel=1e-14)
    assert c_alpha(1e-9) == pytest.approx(2.0, rel=1e-8)


@given(alphas)
def test_psi_endpoints_and_center(alpha):
    assert abs(psi_alpha(alpha, -1.0)) <= 1e-11
    assert abs(psi_alpha(alpha, 1.0) - 1.0) <= 1e-11
    assert abs(psi_alpha(alpha, 0.0) - 0.5) <= 1e-11


@given(alphas, st.floats(-3, 3))
def test_psi_reflection_and_clamping(alpha, z):
    assert abs(psi_alpha(alpha, z) + psi_alpha(alpha, -z) - 1.0) <= 1e-11
    assert 0.0 <= psi_alpha(alpha, z) <= 1.0 + 1e-15


@settings(max_examples=30)
@given(alphas)
def test_psi_monotone(alpha):
    vals = psi_alpha(alpha, np.linspace(-1.2, 1.2, 97))
    assert np.all(np.diff(vals) >= -1e-15)


def test_psi_matches_density_quadrature():
    alpha, z = 1.7, 0.35
    mass = integrate(lambda s: (1 - s * s) ** alpha, -1.0, z, lo_power=alpha)
    full = integrate(lambda s: (1 - s * s) ** alpha, -1.0, 1.0, lo_power=alpha, hi_power=alpha)
    assert psi_alpha(alpha, z) == pytest.approx(mass / full, rel=1e-12)


def test_box_cox_continuity():
    w = np.array([0.3, 1.0, 4.0])
    np.testing.assert_allclose(box_cox(w, 1e-10), np.log(w), atol=1e-9)
    np.testing.assert_allclose(box_cox(w, -1.0), 1 - 1 / w, rtol=1e-14)
