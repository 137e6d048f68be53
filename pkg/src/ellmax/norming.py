"""Norming constants, correlation rules and the coupling sequence ``lambda_n``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy import optimize

from .radial import RadialModel, marginal_g_tail_angular
from .specfun import DEFAULT_SPEC, QuadratureSpec, c_alpha, integrate, log_gamma

__all__ = [
    "RhoRule",
    "NormingSequence",
    "BetaExampleConstants",
    "RateDiagnostic",
    "RootNotBracketedError",
    "InconsistentRuleError",
    "solve_a_n",
    "beta_example_constants",
    "beta_example_a_n",
    "build_sequence",
    "validate_rate_regime",
]

# relative tolerance of the a_n root and of the tail quadrature behind it
_ROOT_RTOL = 1e-13


class RootNotBracketedError(ArithmeticError):
    pass


class InconsistentRuleError(ValueError):
    pass


@dataclass(frozen=True)
class RhoRule:
    """How the correlation ``rho_n`` depends on ``n``.

    Build instances with :meth:`constant`, :meth:`one_minus_power` or
    :meth:`from_table`. ``one_minus_rho`` is returned exactly where possible,
    since ``1 - rho_n`` is what enters ``lambda_n``.
    """

    kind: str
    value: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind == "constant":
            if not -1.0 <= self.value <= 1.0:
                raise ValueError(f"constant rho must lie in [-1, 1], got {self.value!r}")
        elif self.kind == "one_minus_power":
            if not self.value > 0:
                raise ValueError(f"exponent must be positive, got {self.value!r}")
        elif self.kind == "table":
            if not self.table:
                raise ValueError("rho table is empty")
            for n, r in self.table:
                if not -1.0 <= r <= 1.0:
                    raise ValueError(f"rho table entry for n={n} outside [-1, 1]: {r!r}")
        else:
            raise ValueError(f"unknown rho rule kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float) -> "RhoRule":
        return cls("constant", float(value))

    @classmethod
    def one_minus_power(cls, exponent: float) -> "RhoRule":
        return cls("one_minus_power", float(exponent))

    @classmethod
    def from_table(cls, table: Mapping[int, float]) -> "RhoRule":
        return cls("table", table=tuple(sorted((int(n), float(r)) for n, r in table.items())))

    def one_minus_rho(self, n: int) -> float:
        if self.kind == "constant":
            return 1.0 - self.value
        if self.kind == "one_minus_power":
            return float(n) ** (-self.value)
        return 1.0 - self._lookup(n)

    def rho(self, n: int) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "table":
            return self._lookup(n)
        return 1.0 - self.one_minus_rho(n)

    def _lookup(self, n: int) -> float:
        for m, r in self.table:
            if m == n:
                return r
        raise KeyError(f"rho table has no entry for n={n}")


@dataclass(frozen=True)
class NormingSequence:
    """All norming quantities at one ``n``.

    ``lam`` and ``rate_k`` use ``math.inf`` for the infinite limits. For the
    degenerate limits ``lam = 0`` and ``lam = inf`` no rate condition is
    involved; ``c_n`` then equals ``a_n`` and ``gamma`` is 0.
    """

    n: int
    rho_n: float
    one_minus_rho: float
    a_n: float
    lambda_n: float
    lam: float
    c_n: float
    gamma: float
    rate_k: float
    estimated: bool = False


@dataclass(frozen=True)
class BetaExampleConstants:
    """Closed-form constants for a Beta(a, b) radius with ``1 - rho_n = n**(-1/(b + 1/2))``.

    ``m`` uses the integrand ``b + 1 - 3/2 b s - s``; ``m_alt`` is the value
    with ``b + 1 - 3/2 s - s`` (the two agree at ``b = 1``).
    """

    a: float
    b: float
    c_b: float
    scale: float  # b B(a, b) sqrt(2) pi / c_b
    lam: float
    c_n_exponent: float
    gamma: float
    m: float
    m_alt: float
    rate_k: float


@dataclass(frozen=True)
class RateDiagnostic:
    case: str
    passed: bool
    rows: tuple = ()
    note: str = ""


@lru_cache(maxsize=4096)
def _solve_a_n_cached(model: RadialModel, n: int, spec: QuadratureSpec) -> float:
    target = 1.0 / n
    tight = spec.tightened(abs_tol=1e-300, rel_tol=_ROOT_RTOL)

    def excess(log_u):
        return math.log(marginal_g_tail_angular(model, math.exp(log_u), tight)) - math.log(target)

    hi = math.log(0.5)
    if excess(hi) < 0:
        raise RootNotBracketedError(f"marginal tail at u=0.5 is below 1/n for n={n}")
    lo = hi
    for _ in range(60):
        lo -= math.log(10.0)
        g = marginal_g_tail_angular(model, math.exp(lo), tight)
        if g > 0 and math.log(g) < math.log(target):
            break
    else:
        raise RootNotBracketedError(f"could not bracket a_n for n={n}")
    root = optimize.bisect(excess, lo, hi, xtol=_ROOT_RTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.exp(root)


def solve_a_n(model: RadialModel, n: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Solve ``1 - G(1 - a_n) = 1/n`` by bisection in ``log u``.

    Results are memoized per ``(model, n, spec)``.

    Raises
    ------
    RootNotBracketedError
        If the marginal tail cannot be brought across ``1/n``.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    return _solve_a_n_cached(model, int(n), spec)


@lru_cache(maxsize=64)
def beta_example_constants(a: float, b: float) -> BetaExampleConstants:
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    a = float(a)
    b = float(b)
    c_b = c_alpha(b)
    log_beta = log_gamma(a) + log_gamma(b) - log_gamma(a + b)
    scale = b * math.exp(log_beta) * math.sqrt(2.0) * math.pi / c_b
    coef = b * (a - 1.0) / (b + 1.0)
    half_moment = math.exp(log_gamma(b + 1.0) + log_gamma(1.5) - log_gamma(b + 2.5))

    def scale_integral(k):
        return integrate(
            lambda s: (1.0 - s) ** (b - 1.0) * np.sqrt(s) * (b + 1.0 - k * s - s),
            0.0, 1.0, lo_power=0.5, hi_power=b - 1.0,
        )

    tail = -coef + coef * half_moment / c_b
    m = scale_integral(1.5 * b) / c_b + tail
    m_alt = scale_integral(1.5) / c_b + tail
    beta_idx = b + 0.5
    return BetaExampleConstants(
        a=a,
        b=b,
        c_b=c_b,
        scale=scale,
        lam=scale ** (-1.0 / (2.0 * b + 1.0)) / math.sqrt(2.0),
        c_n_exponent=1.0 / beta_idx,
        gamma=m / (2.0 * math.sqrt(2.0) * beta_idx) * scale ** (1.0 / (2.0 * b + 1.0)),
        m=m,
        m_alt=m_alt,
        rate_k=scale ** (-1.0 / beta_idx),
    )


def beta_example_a_n(a: float, b: float, n: int, use_alt_m: bool = False) -> float:
    """Two-term closed-form approximation of ``a_n`` for a Beta(a, b) radius."""
    if n < 2:
        raise ValueError("n must be >= 2")
    k = beta_example_constants(a, b)
    m = k.m_alt if use_alt_m else k.m
    beta_idx = b + 0.5
    lead = (k.scale / n) ** (1.0 / beta_idx)
    return lead - m / beta_idx * lead * lead


def _critical_exponent(model: RadialModel) -> float:
    return 1.0 / (model.alpha + 0.5)


def _estimate_limits(model, rule, n, spec):
    """Fit ``lambda_m = lam + gamma a_m`` over ``m = n, 2n, 4n, 8n``."""
    ms = [n * 2**j for j in range(4)]
    lam_ms, a_ms = [], []
    for m in ms:
        a_m = solve_a_n(model, m, spec)
        a_ms.append(a_m)
        lam_ms.append(math.sqrt(rule.one_minus_rho(m) / (2.0 * a_m)))
    gamma, lam = np.polyfit(a_ms, lam_ms, 1)
    if not lam > 0:
        raise InconsistentRuleError(f"extrapolated lambda is not positive ({lam!r})")
    return float(lam), float(gamma)


def build_sequence(
    model: RadialModel,
    rule: RhoRule,
    n: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
    lam: float | None = None,
    c_n: float | None = None,
    gamma: float | None = None,
) -> NormingSequence:
    """Assemble the :class:`NormingSequence` for ``model`` under ``rule`` at ``n``.

    The limit ``lam`` is resolved in this order: explicit argument, the
    degenerate cases ``rho = 1`` (``lam = 0``) and constant ``rho < 1``
    (``lam = inf``), power rules by comparing the exponent with
    ``1/(alpha + 1/2)``, the closed-form Beta constants, and finally a
    least-squares extrapolation flagged as ``estimated``.
    """
    a_n = solve_a_n(model, n, spec)
    one_minus = rule.one_minus_rho(n)
    rho_n = rule.rho(n)
    lambda_n = math.sqrt(one_minus / (2.0 * a_n))

    def degenerate(limit):
        return NormingSequence(n, rho_n, one_minus, a_n, lambda_n, limit, a_n, 0.0, 1.0)

    if lam is not None:
        if lam == 0 or math.isinf(lam):
            if lam == 0 and one_minus != 0 and rule.kind == "constant":
                raise InconsistentRuleError("constant rho < 1 cannot have lambda = 0")
            return degenerate(float(lam))
        if one_minus == 0:
            raise InconsistentRuleError("rho_n = 1 requires lambda = 0")
        if c_n is None or gamma is None:
            raise ValueError("a finite lambda needs c_n and gamma as well")
        return NormingSequence(n, rho_n, one_minus, a_n, lambda_n, float(lam), c_n, gamma, c_n / a_n)

    if rule.kind == "constant":
        return degenerate(0.0 if one_minus == 0 else math.inf)

    if rule.kind == "one_minus_power":
        crit = _critical_exponent(model)
        if rule.value > crit * (1 + 1e-12):
            return degenerate(0.0)
        if rule.value < crit * (1 - 1e-12):
            return degenerate(math.inf)
        if model.key[0] == "beta":
            k = beta_example_constants(model.key[1], model.key[2])
            cn = float(n) ** (-k.c_n_exponent)
            return NormingSequence(n, rho_n, one_minus, a_n, lambda_n, k.lam, cn, k.gamma, k.rate_k)

    est_lam, est_gamma = _estimate_limits(model, rule, n, spec)
    return NormingSequence(n, rho_n, one_minus, a_n, lambda_n, est_lam, a_n, est_gamma, 1.0, estimated=True)


def _monotone(values, decreasing=True):
    diffs = np.diff(values)
    return bool(np.all(diffs < 0) if decreasing else np.all(diffs > 0))


def validate_rate_regime(
    model: RadialModel,
    rule: RhoRule,
    case: str,
    n_schedule=(10**3, 10**4, 10**5, 10**6),
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> RateDiagnostic:
    """Check the side conditions for the degenerate limits along ``n_schedule``.

    ``lambda_zero`` needs ``(1-rho_n)/a_n -> 0`` and ``a_n**(5/3)/(1-rho_n) -> 0``;
    ``lambda_inf_i`` needs ``(1-rho_n)/a_n -> inf`` and ``(1-rho_n)**3/a_n -> 0``.
    Trends are judged by strict monotonicity over the schedule.
    """
    if case not in ("lambda_zero", "lambda_inf_i"):
        raise ValueError(f"unknown case {case!r}")
    if rule.kind == "constant":
        if case == "lambda_zero" and rule.value == 1.0:
            return RateDiagnostic(case, True, note="rho_n = 1: no side condition")
        if case == "lambda_inf_i" and rule.value < 1.0:
            return RateDiagnostic(case, True, note="rho_n constant below 1: no side condition")
        return RateDiagnostic(case, False, note="constant rule does not belong to this case")

    rows = []
    for n in n_schedule:
        a_n = solve_a_n(model, n, spec)
        om = rule.one_minus_rho(n)
        if om <= 0:
            return RateDiagnostic(case, False, tuple(rows), note=f"rho_n = 1 at n={n}")
        if case == "lambda_zero":
            rows.append((n, om / a_n, a_n ** (5.0 / 3.0) / om))
        else:
            rows.append((n, om / a_n, om**3 / a_n))
    first = [r[1] for r in rows]
    second = [r[2] for r in rows]
    ok = _monotone(second) and _monotone(first, decreasing=(case == "lambda_zero"))
    return RateDiagnostic(case, ok, tuple(rows))
