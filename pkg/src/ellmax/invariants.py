"""Self-check suite over the properties every module promises.

``run_invariant_suite`` evaluates each check on fixed inputs and collects a
pass/fail line per check; nothing here is random except the seeded Monte Carlo
determinism probe.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import specfun
from .expansions import (
    _boundary_parts,
    _q_clamped,
    example_delta_beta,
    example_inputs,
    expansion_result,
)
from .limits import boundary_point, classify_regime, h_limit
from .norming import RhoRule, beta_example_a_n, beta_example_constants, build_sequence, solve_a_n
from .oracle import (
    McConfig,
    angle_expansion,
    joint_cdf_exact,
    joint_exceedance,
    sample_threshold_cdf,
    _geometry_from_gaps,
)
from .radial import (
    beta_radius,
    g_tail_ratio_expansion,
    lemma2_expansion,
    lemma2_expectation_exact,
    marginal_g_tail_angular,
    marginal_g_tail_berman,
)

__all__ = ["CheckResult", "InvariantReport", "run_invariant_suite", "CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class InvariantReport:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self):
        for r in self.results:
            yield f"{'PASS' if r.passed else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail else "")


ALPHAS = (0.3, 0.5, 1.0, 1.7, 3.0)
BETA_MODELS = ((1, 1), (2, 1), (2, 3), (0.5, 2))


def _decreasing(seq) -> bool:
    return all(b < a for a, b in zip(seq, seq[1:]))


def check_psi_axioms():
    worst = 0.0
    zs = np.linspace(-1.0, 1.0, 41)
    for a in ALPHAS:
        psi = specfun.psi_alpha(a, zs)
        worst = max(worst, abs(specfun.psi_alpha(a, -1.0)), abs(specfun.psi_alpha(a, 1.0) - 1.0))
        worst = max(worst, float(np.max(np.abs(psi + psi[::-1] - 1.0))))
        if np.any(np.diff(psi) < -1e-15):
            return False, f"psi_{a} not monotone"
    return worst <= 1e-11, f"max axiom defect {worst:.2e}"


def check_c_alpha():
    worst = 0.0
    for a in ALPHAS:
        quad = specfun.integrate(lambda s: (1 - s) ** a / np.sqrt(s), 0.0, 1.0, lo_power=-0.5, hi_power=a)
        worst = max(worst, abs(quad / specfun.c_alpha(a) - 1.0))
    return worst <= 1e-10, f"max relative gap {worst:.2e}"


def check_cross_route():
    worst = 0.0
    for a, b in BETA_MODELS:
        m = beta_radius(a, b)
        for u in (1e-1, 1e-2, 1e-3, 1e-4):
            ang = marginal_g_tail_angular(m, u)
            worst = max(worst, abs(marginal_g_tail_berman(m, u) / ang - 1.0))
    return worst <= 1e-10, f"max relative gap {worst:.2e}"


def check_tail_slope():
    us = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    worst = 0.0
    for a, b in BETA_MODELS:
        m = beta_radius(a, b)
        logs = np.log([marginal_g_tail_angular(m, u) for u in us])
        slope = np.polyfit(np.log(us), logs, 1)[0]
        worst = max(worst, abs(slope - (b + 0.5)))
    return worst <= 0.02, f"max slope error {worst:.3e}"


def check_second_order_rv():
    ok = True
    for a, b in ((2, 1), (3, 2), (0.5, 2)):
        m = beta_radius(a, b)
        for s in (0.5, 2.0):
            res = []
            for t in (1e3, 1e4, 1e5):
                lhs = (m.tail(t * s) / m.tail(t) - s ** (-m.alpha)) / m.aux(t)
                rhs = s ** (-m.alpha) * (s**m.tau - 1.0) / m.tau
                res.append(abs(lhs - rhs))
            ok &= _decreasing(res)
    return ok, ""


def check_lemma3_residual():
    m = beta_radius(2, 1)
    ok = True
    for xa in (0.5, 2.0):
        res = []
        for t in (1e2, 1e3, 1e4):
            num = marginal_g_tail_berman(m, 1 / (t * xa)) / marginal_g_tail_berman(m, 1 / t)
            res.append(abs(num - g_tail_ratio_expansion(m, t, xa)) / (1 / t + abs(m.aux(t))))
        ok &= _decreasing(res)
    return ok, ""


def check_lemma2_residual():
    m = beta_radius(2, 1)
    ok = True
    for qa, qb in ((0.5, 0.5), (2.0, 3.0)):
        res = []
        for n in (10**3, 10**4, 10**5):
            a_n = solve_a_n(m, n)
            ex = lemma2_expectation_exact(m, qa, qb, n, -1.0, a_n=a_n)
            ap = lemma2_expansion(m, qa, qb, n, -1.0, a_n=a_n)
            res.append(abs(ex - ap) / ex / (a_n + abs(m.aux(1 / a_n))))
        ok &= _decreasing(res)
    return ok, ""


def check_norming():
    m = beta_radius(2, 1)
    gaps = [abs(solve_a_n(m, n) / beta_example_a_n(2, 1, n) - 1) for n in (10**3, 10**4, 10**5, 10**6)]
    seqs = [build_sequence(m, RhoRule.one_minus_power(2 / 3), n) for n in (10**4, 10**5, 10**6, 10**7)]
    lam_gaps = [abs(s.lambda_n - s.lam) for s in seqs]
    gam_gaps = [abs((s.lambda_n - s.lam) / s.c_n - s.gamma) for s in seqs]
    resid = max(abs(n * marginal_g_tail_angular(m, solve_a_n(m, n)) - 1) for n in (10**3, 10**6))
    ok = _decreasing(gaps) and _decreasing(lam_gaps) and _decreasing(gam_gaps) and resid <= 1e-12
    return ok, f"a_n gap at 1e6 {gaps[-1]:.2e}, root residual {resid:.1e}"


def _h_grid():
    xs = np.linspace(-5.0, -0.05, 12)
    return [(lam, a, xs) for lam in (0.2, 0.6, 1.0, 3.0) for a in (0.5, 1.0, 2.0)]


def check_h_bounds_and_order():
    for lam, a, xs in _h_grid():
        p = a + 0.5
        grid = np.array([[h_limit(a, lam, x, y) for y in xs] for x in xs])
        if np.any(grid < 0) or np.any(grid > 1):
            return False, "H outside [0, 1]"
        if np.any(np.diff(grid, axis=0) < -1e-12) or np.any(np.diff(grid, axis=1) < -1e-12):
            return False, f"H not monotone at lambda={lam}, alpha={a}"
        for (i, x), (j, y) in itertools.product(enumerate(xs), enumerate(xs)):
            lo = math.exp(-(abs(x) ** p) - abs(y) ** p)
            hi = math.exp(-(abs(min(x, y)) ** p))
            if not lo - 1e-15 <= grid[i, j] <= hi + 1e-15:
                return False, f"dependence ordering fails at ({x}, {y})"
    return True, ""


def check_h_symmetry():
    for lam, a, xs in _h_grid():
        for x, y in itertools.product(xs, xs):
            if h_limit(a, lam, x, y) != h_limit(a, lam, y, x):
                return False, f"asymmetric at lambda={lam}, alpha={a}, ({x}, {y})"
    # at x = y the two psi arguments coincide, so H = exp(-2|x|^p psi(z)); psi(z) + psi(-z) = 1 ties the pair
    for a in ALPHAS:
        for z in (0.1, 0.45, 0.8):
            if abs(specfun.psi_alpha(a, z) + specfun.psi_alpha(a, -z) - 1.0) > 1e-11:
                return False, f"psi reflection fails at alpha={a}"
    return True, ""


def check_h_continuity():
    lam, a = 0.6, 1.0
    worst = 0.0
    for branch, free in (("near", {"x": -0.2}), ("far_y", {"x": -0.25}), ("far_x", {"y": -0.3})):
        x, y = boundary_point(branch, lam, **free)
        for eps in (1e-6,):
            jump = abs(h_limit(a, lam, x, y * (1 + eps)) - h_limit(a, lam, x, y * (1 - eps)))
            worst = max(worst, jump / eps)
    return worst < 10.0, f"max difference quotient {worst:.3g}"


def check_oracle_bounds():
    m = beta_radius(2, 1)
    grid = (0.6, 0.8, 0.9, 0.97)
    g_of = {u: 1.0 - marginal_g_tail_angular(m, 1 - u) for u in grid}
    for rho in (-0.5, 0.0, 0.5, 0.9):
        for u, v in itertools.product(grid, grid):
            c = joint_cdf_exact(m, rho, u, v).joint_cdf
            lo, hi = max(0.0, g_of[u] + g_of[v] - 1.0), min(g_of[u], g_of[v])
            if not lo - 1e-12 <= c <= hi + 1e-12:
                return False, f"Frechet bound fails at rho={rho}, ({u}, {v})"
            # with a bounded radius C >= G(u)G(v) fails even at rho = 0, so only the ordering in rho is checked
            if rho < 0.9 and c > joint_cdf_exact(m, rho + 0.05, u, v).joint_cdf + 1e-12:
                return False, f"cdf decreases in rho at rho={rho}, ({u}, {v})"
            if abs(c - joint_cdf_exact(m, rho, v, u).joint_cdf) > 1e-13:
                return False, "exchange symmetry fails"
        for (u1, u2), (v1, v2) in itertools.product(zip(grid, grid[1:]), repeat=2):
            mass = (
                joint_cdf_exact(m, rho, u2, v2).joint_cdf - joint_cdf_exact(m, rho, u1, v2).joint_cdf
                - joint_cdf_exact(m, rho, u2, v1).joint_cdf + joint_cdf_exact(m, rho, u1, v1).joint_cdf
            )
            if mass < -1e-10:
                return False, f"rectangle mass {mass:.2e} at rho={rho}"
    marg = abs(joint_cdf_exact(m, 0.5, 0.9, 1 - 1e-12).joint_cdf - g_of[0.9])
    return marg <= 1e-10, f"marginal consistency gap {marg:.1e}"


def check_angle_expansions():
    m = beta_radius(2, 1)
    k = beta_example_constants(2, 1)
    rule = RhoRule.one_minus_power(2 / 3)
    x, y = -1.0, -0.5
    res_b, res_bt = [], []
    for n in (10**4, 10**6, 10**8):
        s = build_sequence(m, rule, n)
        _, beta, beta_t = _geometry_from_gaps(s.one_minus_rho, -s.a_n * x, -s.a_n * y)
        pb, pbt = angle_expansion(k.lam, k.gamma, s.a_n, s.c_n, x, y)
        scale = s.a_n + s.c_n
        res_b.append(abs(math.sin(beta) / math.sqrt(s.a_n) - pb) / scale)
        res_bt.append(abs(math.sin(beta_t) / math.sqrt(s.a_n) - pbt) / scale)
    return _decreasing(res_b) and _decreasing(res_bt), f"final residuals {res_b[-1]:.2e}, {res_bt[-1]:.2e}"


def check_expansion_symmetry():
    worst = 0.0
    lam = beta_example_constants(2, 1).lam
    pts = [(-1.0, -0.5), (-2.0, -1.0), (-0.3, -0.8), boundary_point("near", lam, x=-0.2)]
    for x, y in pts:
        a = expansion_result(example_inputs(2, 1, x, y, 10**4)).delta_pred
        b = expansion_result(example_inputs(2, 1, y, x, 10**4)).delta_pred
        worst = max(worst, abs(a - b) / abs(a))
    return worst <= 1e-10, f"max relative asymmetry {worst:.2e}"


def check_generic_vs_example():
    xs = (-0.05, -0.3, -1.0, -2.0, -4.0)
    worst = 0.0
    for x, y in itertools.product(xs, xs):
        g = expansion_result(example_inputs(2, 1, x, y, 10**4)).delta_pred
        e = example_delta_beta(2, 1, x, y, 10**4)
        worst = max(worst, abs(g - e))
    return worst <= 1e-10, f"max gap {worst:.2e}"


def check_bracket_vanishing():
    from dataclasses import replace

    base = example_inputs(2, 1, -1.0, -0.7, 10**4)
    vals = []
    for s in (1.0, 1e-2, 1e-4):
        inp = replace(base, a_n=base.a_n * s, c_n=base.c_n * s, A_val=base.A_val * s, n=int(base.n / s))
        vals.append(abs(expansion_result(inp).bracket))
    return _decreasing(vals) and vals[-1] < 1e-6, f"brackets {vals[0]:.2e} -> {vals[-1]:.2e}"


def check_boundary_degeneration():
    lam = beta_example_constants(2, 1).lam
    xb, yb = boundary_point("near", lam, x=-0.2)
    target = _boundary_parts(example_inputs(2, 1, xb, yb, 10**4))[0]
    gaps = []
    for eps in (1e-2, 1e-3, 1e-4):
        inp = example_inputs(2, 1, xb, yb * (1 + eps), 10**4)
        if inp.point.regime.label.value != "Interior":
            return False, "path left the interior"
        gaps.append(abs(_q_clamped(inp) - target))
    return _decreasing(gaps), f"gap {gaps[-1]:.2e}"


def check_mc_determinism():
    m = beta_radius(2, 1)
    mc = McConfig(3000, 2024)
    thr = [(0.9, 0.92)]
    a = sample_threshold_cdf(m, 0.6, 20, thr, mc, workers=1)
    b = sample_threshold_cdf(m, 0.6, 20, thr, mc, workers=3)
    return a == b, ""


def check_oracle_tail_space():
    m = beta_radius(2, 1)
    u, v = 1 - 1e-7, 1 - 2e-7
    eps = joint_exceedance(m, 0.999, u, v)
    rough = 1.0 - joint_cdf_exact(m, 0.999, u, v).joint_cdf
    ok = 0 < eps < marginal_g_tail_angular(m, 1e-7) + marginal_g_tail_angular(m, 2e-7)
    return ok and abs(rough / eps - 1) < 1e-2, f"exceedance {eps:.3e}"


CHECKS: tuple[tuple[str, Callable], ...] = (
    ("specfun: psi axioms", check_psi_axioms),
    ("specfun: c_alpha identity", check_c_alpha),
    ("radial: Berman vs angular marginal tail", check_cross_route),
    ("radial: marginal tail index", check_tail_slope),
    ("radial: second-order regular variation of beta tails", check_second_order_rv),
    ("radial: second-order tail ratio residual", check_lemma3_residual),
    ("radial: beta-mixture expectation residual", check_lemma2_residual),
    ("norming: a_n, lambda_n and gamma convergence", check_norming),
    ("limits: H range, monotonicity and dependence ordering", check_h_bounds_and_order),
    ("limits: symmetry", check_h_symmetry),
    ("limits: continuity across boundaries", check_h_continuity),
    ("oracle: Frechet bounds, ordering in rho, exchangeability, 2-increasing", check_oracle_bounds),
    ("oracle: split-angle expansions", check_angle_expansions),
    ("oracle: tail-space exceedance", check_oracle_tail_space),
    ("oracle: Monte Carlo determinism across workers", check_mc_determinism),
    ("expansions: swap symmetry", check_expansion_symmetry),
    ("expansions: generic vs closed-form beta", check_generic_vs_example),
    ("expansions: brackets vanish with the small parameters", check_bracket_vanishing),
    ("expansions: interior degenerates to boundary", check_boundary_degeneration),
)


def run_invariant_suite() -> InvariantReport:
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    return InvariantReport(tuple(results))
