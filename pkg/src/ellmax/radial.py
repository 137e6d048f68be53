"""Radius distributions with second-order tail metadata, and the marginal of S1.

Every distribution here lives on ``[0, 1]``. Internally tails are evaluated in
*gap* coordinates, ``g = 1 - t``: ``survival_gap(g) = 1 - F(1 - g)``. This keeps
relative accuracy for the tiny tails met at large ``n``, where ``1 - F(t)``
computed by subtraction would be mostly rounding noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .specfun import DEFAULT_SPEC, QuadratureSpec, box_cox, c_alpha, integrate, log_gamma

__all__ = [
    "RadialModel",
    "MarginalTail",
    "beta_radius",
    "custom_radial",
    "tabulated_radial",
    "lemma3_integrals",
    "marginal_g_tail_berman",
    "marginal_g_tail_angular",
    "g_tail_ratio_expansion",
    "lemma2_expectation_exact",
    "lemma2_expansion",
]


@dataclass(frozen=True, eq=False)
class RadialModel:
    """Distribution of the radius ``R`` with upper endpoint 1.

    ``survival_gap`` must be vectorized and return ``1 - F(1 - g)``; values of
    ``g`` outside ``[0, 1]`` are clipped by the model. Models compare and hash
    by ``key`` so they can be used in caches.
    """

    survival_gap: Callable[[np.ndarray], np.ndarray]
    alpha: float
    tau: float
    aux: Callable[[float], float]
    key: tuple
    cdf_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    endpoint: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if self.tau > 0:
            raise ValueError(f"tau must be nonpositive, got {self.tau!r}")

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, RadialModel) and self.key == other.key

    def surv(self, g):
        g = np.clip(np.asarray(g, dtype=float), 0.0, 1.0)
        out = np.asarray(self.survival_gap(g), dtype=float)
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        if self.cdf_fn is not None:
            out = np.asarray(self.cdf_fn(t), dtype=float)
        else:
            out = 1.0 - np.asarray(self.survival_gap(1.0 - t), dtype=float)
        return float(out) if out.ndim == 0 else out

    def tail(self, t):
        """``T(t) = 1 - F(1 - 1/t)`` for ``t > 1``."""
        t = np.asarray(t, dtype=float)
        return self.surv(1.0 / t)


@dataclass(frozen=True)
class MarginalTail:
    """``1 - G(1 - u)`` for the first coordinate of the spherical vector."""

    model: RadialModel
    spec: QuadratureSpec = DEFAULT_SPEC

    def g_tail(self, u: float) -> float:
        return marginal_g_tail_angular(self.model, u, self.spec)

    def g_tail_berman(self, u: float) -> float:
        return marginal_g_tail_berman(self.model, u, self.spec)


def beta_radius(a: float, b: float) -> RadialModel:
    """Beta(a, b) radius: tail index ``b``, second-order index -1, ``A(t) = b(a-1)/((b+1)t)``."""
    if not (a > 0 and b > 0):
        raise ValueError(f"beta_radius requires a, b > 0, got a={a!r}, b={b!r}")
    a = float(a)
    b = float(b)
    coef = b * (a - 1.0) / (b + 1.0)
    return RadialModel(
        # 1 - I_{1-g}(a, b) = I_g(b, a)
        survival_gap=lambda g: special.betainc(b, a, g),
        alpha=b,
        tau=-1.0,
        aux=lambda t: coef / t,
        key=("beta", a, b),
        cdf_fn=lambda t: special.betainc(a, b, t),
    )


def custom_radial(
    cdf: Callable,
    alpha: float,
    tau: float,
    aux: Callable[[float], float],
    survival: Callable | None = None,
    key: tuple | None = None,
) -> RadialModel:
    """Wrap a user-supplied cdf on ``[0, 1]`` with declared second-order data.

    Pass ``survival`` (a function of the gap ``g``) when ``1 - cdf(1 - g)``
    would lose precision for small ``g``.
    """
    if survival is None:
        def survival(g):
            return 1.0 - np.asarray(cdf(1.0 - np.asarray(g)), dtype=float)
    return RadialModel(
        survival_gap=survival,
        alpha=float(alpha),
        tau=float(tau),
        aux=aux,
        key=key if key is not None else ("custom", id(cdf)),
        cdf_fn=cdf,
    )


def tabulated_radial(
    table: Sequence[Sequence[float]],
    alpha: float,
    tau: float,
    aux_scale: float = 0.0,
    aux_power: float | None = None,
) -> RadialModel:
    """Radius model from a table of ``(t, F(t))`` pairs.

    The tail is interpolated piecewise-linearly in ``(log gap, log survival)``,
    and continued below the smallest tabulated gap by the declared power law
    ``g**alpha``. The auxiliary function is ``aux_scale * t**aux_power``
    (``aux_power`` defaults to ``tau``).
    """
    rows = sorted((float(t), float(p)) for t, p in table)
    pts = [(1.0 - t, 1.0 - p) for t, p in rows if t < 1.0 and p < 1.0 and t >= 0.0]
    if len(pts) < 2:
        raise ValueError("cdf table needs at least two points with t < 1 and F(t) < 1")
    pts.sort()
    gaps = np.array([g for g, _ in pts])
    survs = np.array([s for _, s in pts])
    if np.any(np.diff(survs) < 0) or np.any(survs <= 0):
        raise ValueError("cdf table must be nondecreasing with F(t) < 1 below the endpoint")
    log_g = np.log(gaps)
    log_s = np.log(survs)
    alpha = float(alpha)
    power = float(tau if aux_power is None else aux_power)

    def survival(g):
        g = np.asarray(g, dtype=float)
        out = np.zeros_like(g)
        pos = g > 0
        lg = np.log(np.where(pos, g, 1.0))
        below = pos & (lg < log_g[0])
        inside = pos & ~below
        out[below] = np.exp(log_s[0] + alpha * (lg[below] - log_g[0]))
        out[inside] = np.exp(np.interp(lg[inside], log_g, log_s))
        return np.minimum(out, 1.0)

    return custom_radial(
        cdf=lambda t: 1.0 - survival(1.0 - np.asarray(t, dtype=float)),
        alpha=alpha,
        tau=float(tau),
        aux=lambda t: aux_scale * t**power,
        survival=survival,
        key=("table", tuple(rows), alpha, float(tau), float(aux_scale), power),
    )


def _second_order_kernel(w, tau: float):
    """``(w**(-tau) - 1)/tau``, i.e. ``-log w`` at ``tau = 0``."""
    return -box_cox(w, -tau)


def lemma3_integrals(alpha: float, tau: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """The two constants in the second-order expansion of the S1 tail.

    Returns ``(i1, i2)`` with
    ``i1 = int_0^1 (1-s)^(alpha-1) s^(1/2) (alpha + 1 - 3/2 alpha s - s) ds`` and
    ``i2 = int_0^1 (1-s)^alpha ((1-s)^(-tau) - 1)/tau s^(-1/2) ds``.
    """
    i1 = integrate(
        lambda s: (1.0 - s) ** (alpha - 1.0) * np.sqrt(s) * (alpha + 1.0 - 1.5 * alpha * s - s),
        0.0, 1.0, spec, lo_power=0.5, hi_power=alpha - 1.0,
    )
    i2 = integrate(
        lambda s: (1.0 - s) ** alpha * _second_order_kernel(1.0 - s, tau) / np.sqrt(s),
        0.0, 1.0, spec, lo_power=-0.5, hi_power=alpha,
    )
    return i1, i2


def _check_gap(u):
    if not 0.0 < u < 1.0:
        raise ValueError(f"gap u must lie in (0, 1), got {u!r}")


def marginal_g_tail_angular(model: RadialModel, u: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``1 - G(1 - u) = (1/pi) int_0^{arccos(1-u)} (1 - F((1-u)/cos a)) da``."""
    _check_gap(u)
    a_max = 2.0 * math.asin(math.sqrt(0.5 * u))

    def f(a):
        # 1 - (1-u)/cos a, written without cancellation
        gap = (u - 2.0 * np.sin(0.5 * a) ** 2) / np.cos(a)
        return model.surv(gap)

    return integrate(f, 0.0, a_max, spec, hi_power=model.alpha) / math.pi


def marginal_g_tail_berman(model: RadialModel, u: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``1 - G(1 - u) = E[1 - F((1-u)(1-Q)^(-1/2))] / 2`` with ``Q ~ Beta(1/2, 1/2)``.

    The range is truncated at ``q = u(2-u)`` where the argument of ``F`` reaches 1.
    """
    _check_gap(u)
    q_max = u * (2.0 - u)

    def f(q):
        root = np.sqrt(1.0 - q)
        gap = (u - q / (1.0 + root)) / root
        return model.surv(gap) / (np.sqrt(q) * root)

    return 0.5 * integrate(f, 0.0, q_max, spec, lo_power=-0.5, hi_power=model.alpha) / math.pi


def g_tail_ratio_expansion(
    model: RadialModel, t: float, x_abs: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """Second-order prediction of ``(1 - G(1 - 1/(t x_abs))) / (1 - G(1 - 1/t))``."""
    alpha, tau = model.alpha, model.tau
    i1, i2 = lemma3_integrals(alpha, tau, spec)
    ca = c_alpha(alpha)
    bc = box_cox(x_abs, tau)
    a_t = model.aux(t)
    correction = (
        (1.0 / x_abs - 1.0) / t * i1 / ca
        + a_t * (bc + (x_abs**tau - 1.0) * i2 / ca)
    )
    return x_abs ** (-0.5 - alpha) * (1.0 + correction)


def _resolve_a_n(model, n, spec, a_n):
    if a_n is not None:
        return a_n
    from .norming import solve_a_n  # norming builds on this module

    return solve_a_n(model, n, spec)


def _beta_log_norm(qa: float, qb: float) -> float:
    return log_gamma(qa + qb) - log_gamma(qa) - log_gamma(qb)


def lemma2_expectation_exact(
    model: RadialModel,
    qa: float,
    qb: float,
    n: int,
    x: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    a_n: float | None = None,
) -> float:
    """``E[1 - F(t_n(x) (1-Q)^(-1/2))]`` for ``Q ~ Beta(qa, qb)``, by direct quadrature.

    ``t_n(x) = 1 + a_n x``; pass ``a_n`` to skip the root solve.
    """
    if not (qa > 0 and qb > 0):
        raise ValueError("Beta parameters must be positive")
    if not x < 0:
        raise ValueError("x must be negative")
    a_n = _resolve_a_n(model, n, spec, a_n)
    g = a_n * abs(x)
    _check_gap(g)
    q_max = g * (2.0 - g)
    norm = math.exp(_beta_log_norm(qa, qb))

    def f(q):
        root = np.sqrt(1.0 - q)
        gap = (g - q / (1.0 + root)) / root
        return model.surv(gap) * q ** (qa - 1.0) * (1.0 - q) ** (qb - 1.0)

    return norm * integrate(f, 0.0, q_max, spec, lo_power=qa - 1.0, hi_power=model.alpha)


def lemma2_expansion(
    model: RadialModel,
    qa: float,
    qb: float,
    n: int,
    x: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    a_n: float | None = None,
    leading_only: bool = False,
) -> float:
    """Second-order expansion of :func:`lemma2_expectation_exact`.

    With ``leading_only`` the ``a_n`` and ``A`` corrections are dropped.
    """
    if not x < 0:
        raise ValueError("x must be negative")
    a_n = _resolve_a_n(model, n, spec, a_n)
    alpha, tau = model.alpha, model.tau
    g = a_n * abs(x)
    prefactor = (2.0 * g) ** qa * math.exp(_beta_log_norm(qa, qb)) * model.surv(g)

    lead = integrate(
        lambda s: (1.0 - s) ** alpha * s ** (qa - 1.0),
        0.0, 1.0, spec, lo_power=qa - 1.0, hi_power=alpha,
    )
    if leading_only:
        return prefactor * lead
    aux_part = integrate(
        lambda s: (1.0 - s) ** alpha * _second_order_kernel(1.0 - s, tau) * s ** (qa - 1.0),
        0.0, 1.0, spec, lo_power=qa, hi_power=alpha,
    )
    shift = 2.0 * (qb - 1.0)
    scale_part = integrate(
        lambda s: (1.0 - s) ** (alpha - 1.0) * s**qa * (alpha - shift - 1.5 * alpha * s + shift * s),
        0.0, 1.0, spec, lo_power=qa, hi_power=alpha - 1.0,
    )
    a_val = model.aux(1.0 / a_n)
    return prefactor * (lead + a_val * abs(x) ** (-tau) * aux_part + g * scale_part)
