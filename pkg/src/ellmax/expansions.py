"""Second-order correction brackets for the normalized maxima.

Every evaluator returns the explicit terms only; the unquantified remainders
are left out. Standardized arguments are clamped to ``[-1, 1]`` exactly as in
``psi``, so the truncated integrals ``int_{-1}^{z}`` become empty or full
outside the interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .limits import EvalPoint, RegimeLabel, classify_regime, h_limit, standardized_args
from .norming import NormingSequence, beta_example_constants
from .radial import RadialModel, lemma3_integrals
from .specfun import DEFAULT_SPEC, QuadratureSpec, c_alpha, integrate, psi_alpha

__all__ = [
    "RegimeMismatchError",
    "ExpansionInputs",
    "ExpansionResult",
    "inputs_from_sequence",
    "example_inputs",
    "q_theorem1",
    "bracket_boundary",
    "bracket_degenerate",
    "expansion_result",
    "example_delta_beta",
]

L = RegimeLabel


class RegimeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionInputs:
    alpha: float
    tau: float
    a_n: float
    c_n: float
    A_val: float
    gamma: float
    n: int
    point: EvalPoint
    lam: float
    rate_k: float
    spec: QuadratureSpec = DEFAULT_SPEC


@dataclass(frozen=True)
class ExpansionResult:
    h: float
    bracket: float
    q_term: float
    penalty_term: float
    delta_pred: float


def inputs_from_sequence(
    model: RadialModel,
    seq: NormingSequence,
    x: float,
    y: float,
    boundary_tol: float = 1e-9,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ExpansionInputs:
    regime = classify_regime(x, y, seq.lam, boundary_tol)
    return ExpansionInputs(
        alpha=model.alpha,
        tau=model.tau,
        a_n=seq.a_n,
        c_n=seq.c_n,
        A_val=model.aux(1.0 / seq.a_n),
        gamma=seq.gamma,
        n=seq.n,
        point=EvalPoint(x, y, regime),
        lam=seq.lam,
        rate_k=seq.rate_k,
        spec=spec,
    )


def example_inputs(a: float, b: float, x: float, y: float, n: int, boundary_tol: float = 1e-9) -> ExpansionInputs:
    """Inputs matching the closed-form Beta example: leading-term ``a_n`` and ``c_n = n**(-1/(b+1/2))``."""
    k = beta_example_constants(a, b)
    a_lead = (k.scale / n) ** k.c_n_exponent
    return ExpansionInputs(
        alpha=k.b,
        tau=-1.0,
        a_n=a_lead,
        c_n=float(n) ** (-k.c_n_exponent),
        A_val=k.b * (k.a - 1.0) / (k.b + 1.0) * a_lead,
        gamma=k.gamma,
        n=n,
        point=EvalPoint(x, y, classify_regime(x, y, k.lam, boundary_tol)),
        lam=k.lam,
        rate_k=k.rate_k,
    )


def _kernel_tau(w, tau):
    """``(w**(-tau) - 1)/tau`` with the ``-log w`` continuation at ``tau = 0``."""
    if abs(tau) < 1e-8:
        return -np.log(w)
    return np.expm1(-tau * np.log(w)) / tau


@lru_cache(maxsize=256)
def _full_integrals(alpha: float, tau: float, spec: QuadratureSpec):
    return lemma3_integrals(alpha, tau, spec)


def _even_partial(f, z, full, power, spec):
    """``int_{-1}^{z} f`` for an even ``f`` with ``int_{-1}^{1} f = full``.

    ``power`` is the algebraic order of ``f`` at ``s = +-1``.
    """
    az = abs(z)
    if az == 0.0:
        part = 0.0
    elif az >= 1.0:
        part = 0.5 * full
    elif az <= 0.5:
        part = integrate(f, 0.0, az, spec)
    else:
        part = 0.5 * full - integrate(f, az, 1.0, spec, hi_power=power)
    return 0.5 * full + math.copysign(part, z)


def _truncated_integrals(alpha, tau, z, spec):
    i1, i2 = _full_integrals(alpha, tau, spec)

    def k(s):
        s2 = s * s
        return (1.0 - s2) ** (alpha - 1.0) * s2 * (alpha + 1.0 - 1.5 * alpha * s2 - s2)

    def l(s):
        w = 1.0 - s * s
        return w**alpha * _kernel_tau(w, tau)

    return _even_partial(k, z, i1, alpha - 1.0, spec), _even_partial(l, z, i2, alpha, spec), i1, i2


def _theorem1_block(inp: ExpansionInputs, w: float, z_raw: float, gamma_factor: float, poly: float):
    """One variable's contribution to Q; ``poly`` already carries its sign."""
    alpha, tau = inp.alpha, inp.tau
    ca = c_alpha(alpha)
    z = min(max(z_raw, -1.0), 1.0)
    j_z, l_z, i1, i2 = _truncated_integrals(alpha, tau, z, inp.spec)
    psi = psi_alpha(alpha, z)
    density = max(0.0, 1.0 - z * z) ** alpha / (ca * math.sqrt(2.0 * w))
    inner = (
        -inp.a_n * w / ca * j_z
        - inp.A_val * w ** (-tau) / ca * l_z
        + psi * (-inp.A_val * _kernel_tau(w, tau) + inp.a_n / ca * i1 + inp.A_val / ca * i2)
        - density * (inp.c_n * inp.gamma * gamma_factor + 0.5 * inp.a_n * poly)
    )
    return w ** (alpha + 0.5) * inner


def _q_clamped(inp: ExpansionInputs) -> float:
    x, y, lam = inp.point.x, inp.point.y, inp.lam
    z_x, z_y = standardized_args(lam, x, y)
    d = y - x
    common = lam * d + x * d / lam + d**3 / (8.0 * lam**3)
    poly_x = -(common + 3.0 * d * d / (4.0 * lam))
    poly_y = common + d * d / (4.0 * lam)
    qx = _theorem1_block(inp, -x, z_x, 1.0 - d / (2.0 * lam * lam), poly_x)
    qy = _theorem1_block(inp, -y, z_y, 1.0 + d / (2.0 * lam * lam), poly_y)
    return qx + qy


def q_theorem1(inp: ExpansionInputs) -> float:
    """The correction ``Q`` for an interior point (``D < 0``, finite positive ``lambda``)."""
    if inp.point.regime.label is not L.INTERIOR:
        raise RegimeMismatchError(f"q_theorem1 needs an Interior point, got {inp.point.regime.label}")
    return float(_q_clamped(inp))


def _marginal_block(inp: ExpansionInputs, w: float, with_a_n: bool) -> float:
    alpha, tau = inp.alpha, inp.tau
    ca = c_alpha(alpha)
    i1, i2 = _full_integrals(alpha, tau, inp.spec)
    a_part = inp.a_n * (w - 1.0) / ca * i1 if with_a_n else 0.0
    aux_part = inp.A_val * (_kernel_tau(w, tau) + (w ** (-tau) - 1.0) / ca * i2)
    return -(w ** (alpha + 0.5)) * (a_part + aux_part)


def _blocks_bracket(inp, weights, with_a_n):
    """Sum of per-variable marginal blocks plus the ``-n^{-1}/2 (sum w^p)^2`` penalty."""
    p = inp.alpha + 0.5
    q = sum(_marginal_block(inp, w, with_a_n) for w in weights)
    penalty = -0.5 / inp.n * sum(w**p for w in weights) ** 2
    return q, penalty


def _boundary_weights(inp):
    x, y = -inp.point.x, -inp.point.y
    label = inp.point.regime.label
    if label in (L.BOUNDARY_NEAR, L.EXTERIOR_BOTH, L.LAMBDA_INF):
        return (x, y)
    if label in (L.BOUNDARY_FAR_Y, L.EXTERIOR_Y_FAR):
        return (y,)
    if label in (L.BOUNDARY_FAR_X, L.EXTERIOR_X_FAR):
        return (x,)
    if label is L.LAMBDA_ZERO:
        return (max(x, y),)
    raise RegimeMismatchError(f"no marginal-block form for regime {label}")


def _boundary_parts(inp):
    label = inp.point.regime.label
    if not (label.is_boundary or label.is_exterior):
        raise RegimeMismatchError(f"bracket_boundary needs a boundary or exterior point, got {label}")
    # on the boundary, a_n = o(c_n) drops the a_n terms; exterior points always keep them
    with_a_n = not (label.is_boundary and math.isinf(inp.rate_k))
    return _blocks_bracket(inp, _boundary_weights(inp), with_a_n)


def bracket_boundary(inp: ExpansionInputs) -> float:
    """Bracket for boundary points and, through the same blocks, exterior points."""
    q, penalty = _boundary_parts(inp)
    return float(q + penalty)


def _degenerate_parts(inp):
    label = inp.point.regime.label
    if not label.is_degenerate:
        raise RegimeMismatchError(f"bracket_degenerate needs lambda = 0 or infinity, got {label}")
    return _blocks_bracket(inp, _boundary_weights(inp), True)


def bracket_degenerate(inp: ExpansionInputs) -> float:
    """Bracket for ``lambda = 0`` (minimum of the two blocks) or ``lambda = inf`` (both blocks)."""
    q, penalty = _degenerate_parts(inp)
    return float(q + penalty)


def expansion_result(inp: ExpansionInputs) -> ExpansionResult:
    """Dispatch on the regime and assemble ``h``, the bracket and ``delta_pred = h * bracket``."""
    label = inp.point.regime.label
    x, y = inp.point.x, inp.point.y
    h = h_limit(inp.alpha, inp.lam, x, y)
    if label is L.INTERIOR:
        q = q_theorem1(inp)
        z_x, z_y = standardized_args(inp.lam, x, y)
        p = inp.alpha + 0.5
        s = (-x) ** p * psi_alpha(inp.alpha, z_x) + (-y) ** p * psi_alpha(inp.alpha, z_y)
        penalty = -0.5 / inp.n * s * s
    elif label.is_degenerate:
        q, penalty = _degenerate_parts(inp)
    else:
        q, penalty = _boundary_parts(inp)
    q, penalty = float(q), float(penalty)
    bracket = q + penalty
    return ExpansionResult(h=h, bracket=bracket, q_term=q, penalty_term=penalty, delta_pred=h * bracket)


def example_delta_beta(a: float, b: float, x: float, y: float, n: int, as_printed: bool = False) -> float:
    """Predicted ``P(maxima <= thresholds) - H`` for a Beta(a, b) radius from the closed-form display.

    Evaluated on its own, with ``tau = -1`` substituted by hand and the
    integrals taken directly over ``[-1, z]``. The x-block polynomial uses the
    coefficient ``3/4`` on ``(y-x)**2/lambda``; ``as_printed=True`` uses ``1/4``
    instead; that variant stays swap-symmetric but drifts away from the exact
    finite-``n`` oracle.
    """
    k = beta_example_constants(a, b)
    lam, c_b, gamma = k.lam, k.c_b, k.gamma
    beta_idx = b + 0.5
    lead = (k.scale / n) ** (1.0 / beta_idx)
    coef = b * (a - 1.0) / (b + 1.0)
    d_val = lam * lam + x + y + (x - y) ** 2 / (4.0 * lam * lam)

    def kern(s):
        s2 = s * s
        return (1.0 - s2) ** (b - 1.0) * s2 * (b + 1.0 - 1.5 * b * s2 - s2)

    def diff(s):
        w = 1.0 - s * s
        return w ** (b + 1.0) - w**b

    def from_minus_one(f, z, power):
        if z <= -1.0:
            return 0.0
        return integrate(f, -1.0, min(z, 1.0), lo_power=power, hi_power=power if z >= 1.0 else None)

    k_full = from_minus_one(kern, 1.0, b - 1.0)
    diff_full = from_minus_one(diff, 1.0, b)
    gamma_scale = (c_b / (b * math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)) * math.sqrt(2.0) * math.pi)) ** (
        1.0 / beta_idx
    )

    def block(w, num, gamma_factor, poly, sign):
        z = num / math.sqrt(2.0 * w)
        upper = z if d_val <= 0 else math.copysign(1.0, z)
        out = (
            -w / c_b * from_minus_one(kern, upper, b - 1.0)
            + coef / c_b * w * from_minus_one(diff, upper, b)
            + psi_alpha(b, z) * (coef * (w - 1.0) + k_full / c_b - coef / c_b * diff_full)
        )
        if d_val <= 0:
            zc = min(max(z, -1.0), 1.0)
            out -= (
                max(0.0, 1.0 - zc * zc) ** b
                / (c_b * math.sqrt(2.0 * w))
                * (gamma * gamma_factor * gamma_scale + sign * 0.5 * poly)
            )
        return w ** (b + 0.5) * out

    d = y - x
    x_sq = (1.0 if as_printed else 3.0) * d * d / (4.0 * lam)
    poly_x = lam * d + d**3 / (8.0 * lam**3) + x_sq + x * d / lam
    poly_y = lam * d + d**3 / (8.0 * lam**3) + d * d / (4.0 * lam) + x * d / lam
    num_x = lam + (y - x) / (2.0 * lam)
    num_y = lam + (x - y) / (2.0 * lam)
    bx = block(-x, num_x, 1.0 - d / (2.0 * lam * lam), poly_x, -1.0)
    by = block(-y, num_y, 1.0 - (x - y) / (2.0 * lam * lam), poly_y, 1.0)

    z_x, z_y = num_x / math.sqrt(-2.0 * x), num_y / math.sqrt(-2.0 * y)
    s = (-x) ** (b + 0.5) * psi_alpha(b, z_x) + (-y) ** (b + 0.5) * psi_alpha(b, z_y)
    bracket = lead * (bx + by) - 0.5 / n * s * s
    return float(h_limit(b, lam, x, y) * bracket)
