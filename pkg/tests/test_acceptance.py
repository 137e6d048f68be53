"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

The lines are printed in the terminal summary of any pytest run that
collects this module (see ``conftest.py``), and by running the file directly.
"""

import math
import time

import numpy as np
import pytest

from ellmax.expansions import example_delta_beta, example_inputs, expansion_result, inputs_from_sequence
from ellmax.limits import boundary_point, h_limit
from ellmax.norming import RhoRule, beta_example_a_n, beta_example_constants, build_sequence, solve_a_n
from ellmax.oracle import McConfig, maxima_cdf_exact, sample_maxima
from ellmax.radial import (
    beta_radius,
    g_tail_ratio_expansion,
    lemma2_expansion,
    lemma2_expectation_exact,
    marginal_g_tail_angular,
    marginal_g_tail_berman,
)
from ellmax.specfun import c_alpha, integrate, psi_alpha

ALPHAS = (0.3, 0.5, 1.0, 1.7, 3.0)
BETA_MODELS = ((1, 1), (2, 1), (2, 3), (0.5, 2))
EXAMPLE_RULE = RhoRule.one_minus_power(2 / 3)
LAM = beta_example_constants(2, 1).lam

RESULTS: dict = {}


def record(number, title, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    RESULTS[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}  ({detail}; {elapsed:.1f}s of {budget:g}s)"
    print(RESULTS[number])
    return ok


def strictly_decreasing(seq):
    return all(b < a for a, b in zip(seq, seq[1:]))


def test_criterion_1_special_functions():
    t0 = time.perf_counter()
    worst_psi = worst_c = 0.0
    monotone = True
    zs = np.linspace(-1, 1, 201)
    for a in ALPHAS:
        psi = psi_alpha(a, zs)
        worst_psi = max(worst_psi, abs(psi_alpha(a, -1.0)), abs(psi_alpha(a, 1.0) - 1),
                        float(np.max(np.abs(psi + psi[::-1] - 1))))
        monotone &= bool(np.all(np.diff(psi) >= -1e-15))
        quad = integrate(lambda s: (1 - s) ** a / np.sqrt(s), 0.0, 1.0, lo_power=-0.5, hi_power=a)
        worst_c = max(worst_c, abs(quad / c_alpha(a) - 1))
    ok = worst_psi <= 1e-11 and worst_c <= 1e-10 and monotone
    assert record(1, "psi axioms and c_alpha identity", ok,
                  f"psi defect {worst_psi:.1e}, c_alpha rel gap {worst_c:.1e}", time.perf_counter() - t0, 10)


def test_criterion_2_marginal_tail_routes():
    t0 = time.perf_counter()
    worst, worst_slope = 0.0, 0.0
    for a, b in BETA_MODELS:
        m = beta_radius(a, b)
        for u in (1e-1, 1e-2, 1e-3, 1e-4):
            worst = max(worst, abs(marginal_g_tail_berman(m, u) / marginal_g_tail_angular(m, u) - 1))
        us = np.array([1e-2, 1e-3, 1e-4, 1e-5])
        slope = np.polyfit(np.log(us), np.log([marginal_g_tail_angular(m, u) for u in us]), 1)[0]
        worst_slope = max(worst_slope, abs(slope - (b + 0.5)))
    ok = worst <= 1e-10 and worst_slope <= 0.02
    assert record(2, "marginal tail cross-route and index", ok,
                  f"route gap {worst:.1e}, slope error {worst_slope:.1e}", time.perf_counter() - t0, 30)


def test_criterion_3_second_order_tail_ratio():
    t0 = time.perf_counter()
    m = beta_radius(2, 1)
    ok, finals = True, []
    for xa in (0.5, 2.0):
        res = []
        for t in (1e2, 1e3, 1e4):
            num = marginal_g_tail_berman(m, 1 / (t * xa)) / marginal_g_tail_berman(m, 1 / t)
            res.append(abs(num - g_tail_ratio_expansion(m, t, xa)) / (1 / t + m.aux(t)))
        ok &= strictly_decreasing(res)
        finals.append(res[-1])
    assert record(3, "second-order tail ratio residual decreasing", ok,
                  "final residuals " + ", ".join(f"{r:.2e}" for r in finals), time.perf_counter() - t0, 30)


def test_criterion_4_beta_mixture_expectation():
    t0 = time.perf_counter()
    m = beta_radius(2, 1)
    ok, finals = True, []
    for qa, qb in ((0.5, 0.5), (2.0, 3.0)):
        res = []
        for n in (10**3, 10**4, 10**5):
            a_n = solve_a_n(m, n)
            ex = lemma2_expectation_exact(m, qa, qb, n, -1.0, a_n=a_n)
            ap = lemma2_expansion(m, qa, qb, n, -1.0, a_n=a_n)
            res.append(abs(ex - ap) / ex / (a_n + m.aux(1 / a_n)))
        ok &= strictly_decreasing(res)
        finals.append(res[-1])
    assert record(4, "beta-mixture expectation residual decreasing", ok,
                  "final residuals " + ", ".join(f"{r:.2e}" for r in finals), time.perf_counter() - t0, 60)


def test_criterion_5_norming():
    t0 = time.perf_counter()
    m = beta_radius(2, 1)
    gap4 = abs(solve_a_n(m, 10**4) / beta_example_a_n(2, 1, 10**4) - 1)
    gap6 = abs(solve_a_n(m, 10**6) / beta_example_a_n(2, 1, 10**6) - 1)
    seqs = [build_sequence(m, EXAMPLE_RULE, n) for n in (10**4, 10**5, 10**6, 10**7)]
    gam_gaps = [abs((s.lambda_n - s.lam) / s.c_n - s.gamma) for s in seqs]
    ok = gap4 <= 0.05 and gap6 <= 0.02 and strictly_decreasing(gam_gaps)
    assert record(5, "a_n closed form and gamma trend", ok,
                  f"a_n gaps {gap4:.1e} / {gap6:.1e}, gamma gap {gam_gaps[-1]:.1e}", time.perf_counter() - t0, 60)


def test_criterion_6_first_order_limit():
    t0 = time.perf_counter()
    m = beta_radius(2, 1)
    grid = [(-1.0, -1.0), (-2.0, -0.5), (-0.5, -0.3), (-1.5, -2.0)]
    sups = []
    for n in (10**3, 10**4, 10**5, 10**6):
        sups.append(max(abs(maxima_cdf_exact(m, EXAMPLE_RULE, n, x, y).maxima_cdf - h_limit(1.0, LAM, x, y))
                        for x, y in grid))
    assert record(6, "first-order limit, sup gap decreasing", strictly_decreasing(sups),
                  "sup gaps " + ", ".join(f"{s:.1e}" for s in sups), time.perf_counter() - t0, 120)


SECOND_ORDER_CASES = [
    ("Interior", EXAMPLE_RULE, lambda: (-1.0, -1.0)),
    ("BoundaryNear", EXAMPLE_RULE, lambda: boundary_point("near", LAM, x=-0.2)),
    ("BoundaryFarY", EXAMPLE_RULE, lambda: boundary_point("far_y", LAM, x=-0.25)),
    ("ExteriorBoth", EXAMPLE_RULE, lambda: (-0.05, -0.05)),
    ("LambdaZero", RhoRule.constant(1.0), lambda: (-2.0, -1.0)),
    ("LambdaInf", RhoRule.constant(0.3), lambda: (-2.0, -1.0)),
]


def second_order_ratio(m, rule, n, x, y):
    seq = build_sequence(m, rule, n)
    inp = inputs_from_sequence(m, seq, x, y)
    res = expansion_result(inp)
    orc = maxima_cdf_exact(m, rule, n, x, y, a_n=seq.a_n)
    delta = res.h * math.expm1(orc.log_maxima_cdf - math.log(res.h))
    return inp.point.regime.label.value, delta / res.delta_pred


def test_criterion_7_second_order():
    t0 = time.perf_counter()
    m = beta_radius(2, 1)
    ok, details = True, []
    for expected, rule, point in SECOND_ORDER_CASES:
        x, y = point()
        labels, ratios = set(), {}
        for n in (10**3, 10**4, 10**5, 10**6):
            label, ratios[n] = second_order_ratio(m, rule, n, x, y)
            labels.add(label)
        devs = [abs(r - 1) for r in ratios.values()]
        case_ok = labels == {expected} and 0.85 <= ratios[10**5] <= 1.15 and strictly_decreasing(devs)
        ok &= case_ok
        details.append(f"{expected} {ratios[10**5]:.5f}")
    assert record(7, "second-order ratio at n=1e5 in [0.85, 1.15], |ratio-1| decreasing", ok,
                  "; ".join(details), time.perf_counter() - t0, 300)


def test_criterion_8_monte_carlo():
    t0 = time.perf_counter()
    m = beta_radius(2, 1)
    n, grid = 200, [(-1.0, -1.0), (-2.0, -0.5)]
    mc = McConfig(200_000, seed=20240601)
    first = sample_maxima(m, EXAMPLE_RULE, n, mc, grid, workers=1)
    again = sample_maxima(m, EXAMPLE_RULE, n, mc, grid, workers=1)
    pooled = sample_maxima(m, EXAMPLE_RULE, n, mc, grid, workers=4)
    zs = []
    for (x, y), est, se in zip(grid, first.estimates, first.std_errors):
        exact = maxima_cdf_exact(m, EXAMPLE_RULE, n, x, y).maxima_cdf
        zs.append(abs(est - exact) / se)
    ok = max(zs) <= 4 and first == again == pooled
    assert record(8, "Monte Carlo within 4 SE, bit-identical across reruns and workers", ok,
                  "z = " + ", ".join(f"{z:.2f}" for z in zs), time.perf_counter() - t0, 60)


def test_criterion_9_double_implementation():
    t0 = time.perf_counter()
    grid = np.linspace(-2.5, -0.1, 5)
    worst = 0.0
    for x in grid:
        for y in grid:
            generic = expansion_result(example_inputs(2, 1, x, y, 10**5)).delta_pred
            worst = max(worst, abs(generic - example_delta_beta(2, 1, x, y, 10**5)))
    assert record(9, "generic vs closed-form expansion on a 5x5 grid", worst <= 1e-10,
                  f"max difference {worst:.1e}", time.perf_counter() - t0, 60)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
