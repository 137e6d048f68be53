"""Exact finite-``n`` distribution of the componentwise maxima, and a Monte Carlo check.

A pair is ``(xi, eta) = R (cos T, cos(T - tau))`` with ``T`` uniform on
``(-pi, pi]`` and ``tau = arccos(rho)``. The probability that a pair exceeds
``(u, v)`` in at least one coordinate splits at the angle ``beta`` where the
two thresholds bind equally:

    eps = (1/2pi) [int_{-A_u}^{min(beta, A_u)} S_u + int_{-A_v}^{min(beta~, A_v)} S_v]

with ``A_u = arccos(u)``, ``S_u(a) = 1 - F(u / cos a)`` and ``beta~ = tau - beta``.
Everything is assembled from tail quantities, so ``eps`` keeps full relative
accuracy and ``P(M_n <= (u, v)) = exp(n log1p(-eps))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .norming import RhoRule, solve_a_n
from .radial import RadialModel
from .specfun import DEFAULT_SPEC, QuadratureSpec, integrate

__all__ = [
    "AngularGeometry",
    "OracleResult",
    "McConfig",
    "McResult",
    "angular_geometry",
    "angle_expansion",
    "joint_survival",
    "joint_exceedance",
    "joint_cdf_exact",
    "maxima_cdf_exact",
    "sample_threshold_cdf",
    "sample_maxima",
]

_HALF_PI = 0.5 * math.pi
# replications per RNG chunk; fixed so results never depend on the worker count
_CHUNK = 1024


@dataclass(frozen=True)
class AngularGeometry:
    tau_n: float
    beta: float
    beta_tilde: float
    u: float
    v: float

    @property
    def beta_clamped(self) -> float:
        return min(max(self.beta, -_HALF_PI), _HALF_PI)

    @property
    def beta_tilde_clamped(self) -> float:
        return min(max(self.beta_tilde, -_HALF_PI), _HALF_PI)


@dataclass(frozen=True)
class OracleResult:
    """``joint_cdf`` is the single-pair df, ``maxima_cdf`` its ``n``-th power.

    ``exceedance`` is ``1 - joint_cdf`` evaluated without subtraction and
    ``log_maxima_cdf`` is ``n log1p(-exceedance)``.
    """

    joint_cdf: float
    maxima_cdf: float
    quadrature_error_bound: float
    exceedance: float
    log_maxima_cdf: float
    n: int = 1


@dataclass(frozen=True)
class McConfig:
    replications: int
    seed: int
    antithetic: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.antithetic and self.replications % 2:
            raise ValueError("antithetic sampling needs an even number of replications")


@dataclass(frozen=True)
class McResult:
    estimates: tuple
    std_errors: tuple
    counts: tuple
    replications: int
    n: int


def _tau_from_gap(one_minus_rho: float) -> float:
    # arccos(1 - d) without cancellation
    return 2.0 * math.asin(math.sqrt(0.5 * one_minus_rho))


def _geometry_from_gaps(one_minus_rho, gu, gv):
    tau = _tau_from_gap(one_minus_rho)
    sin_tau = math.sqrt(one_minus_rho * (2.0 - one_minus_rho))
    # (v/u - rho) written in gaps
    num = (gu - gv) / (1.0 - gu) + one_minus_rho
    beta = math.atan2(num, sin_tau)
    return tau, beta, tau - beta


def angular_geometry(rho: float, u: float, v: float) -> AngularGeometry:
    """Angles splitting the exceedance region of a pair at thresholds ``(u, v)``."""
    if not -1.0 < rho < 1.0:
        raise ValueError("angular_geometry needs |rho| < 1; use the 1-d reductions at rho = +-1")
    if not (0.0 < u < 1.0 and 0.0 < v < 1.0):
        raise ValueError("thresholds must lie in (0, 1)")
    tau, beta, beta_t = _geometry_from_gaps(1.0 - rho, 1.0 - u, 1.0 - v)
    return AngularGeometry(tau, beta, beta_t, u, v)


def angle_expansion(lam, gamma, a_n, c_n, x, y):
    """Predicted ``(sin beta, sin beta~) / sqrt(a_n)`` at thresholds ``1 + a_n (x, y)``."""
    d = y - x
    tail = lam * d + x * d / lam + d**3 / (8.0 * lam**3)
    sb = lam + d / (2.0 * lam) + gamma * (1.0 - d / (2.0 * lam * lam)) * c_n - 0.5 * a_n * (
        tail + 3.0 * d * d / (4.0 * lam)
    )
    sbt = lam - d / (2.0 * lam) + gamma * (1.0 + d / (2.0 * lam * lam)) * c_n + 0.5 * a_n * (
        tail + d * d / (4.0 * lam)
    )
    return sb, sbt


def _angle_gap(g, a):
    # 1 - (1-g)/cos a
    return (g - 2.0 * np.sin(0.5 * a) ** 2) / np.cos(a)


def _arc(g):
    return 2.0 * math.asin(math.sqrt(0.5 * g))


def _partial_angular(model, g, lo, hi, spec):
    """``int_lo^hi (1 - F((1-g)/cos a)) da`` within ``[-A, A]``; returns (value, error)."""
    big_a = _arc(g)
    lo = max(lo, -big_a)
    hi = min(hi, big_a)
    if hi <= lo:
        return 0.0, 0.0
    return integrate(
        lambda a: model.surv(_angle_gap(g, a)),
        lo, hi, spec,
        lo_power=model.alpha if lo == -big_a else None,
        hi_power=model.alpha if hi == big_a else None,
        full_output=True,
    )


def _marginal(model, g, spec):
    val, err = _partial_angular(model, g, 0.0, math.inf, spec)
    return val / math.pi, err / math.pi


def _check_gaps(gu, gv):
    if not (0.0 < gu < 1.0 and 0.0 < gv < 1.0):
        raise ValueError("thresholds must lie in (0, 1)")


def _exceedance_from_gaps(model, one_minus_rho, gu, gv, spec):
    """``1 - P(xi <= 1-gu, eta <= 1-gv)`` and an error estimate."""
    _check_gaps(gu, gv)
    if one_minus_rho <= 0.0:
        return _marginal(model, max(gu, gv), spec)
    if one_minus_rho >= 2.0:
        pu, eu = _marginal(model, gu, spec)
        pv, ev = _marginal(model, gv, spec)
        return min(1.0, pu + pv), eu + ev
    _, beta, beta_t = _geometry_from_gaps(one_minus_rho, gu, gv)
    iu, eu = _partial_angular(model, gu, -math.inf, beta, spec)
    iv, ev = _partial_angular(model, gv, -math.inf, beta_t, spec)
    return (iu + iv) / (2.0 * math.pi), (eu + ev) / (2.0 * math.pi)


def joint_survival(model: RadialModel, rho: float, u: float, v: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``P(xi > u, eta > v)`` for one pair."""
    gu, gv = 1.0 - u, 1.0 - v
    _check_gaps(gu, gv)
    if rho >= 1.0:
        return _marginal(model, min(gu, gv), spec)[0]
    if rho <= -1.0:
        return 0.0
    _, beta, beta_t = _geometry_from_gaps(1.0 - rho, gu, gv)
    su, _ = _partial_angular(model, gu, beta, math.inf, spec)
    sv, _ = _partial_angular(model, gv, beta_t, math.inf, spec)
    return (su + sv) / (2.0 * math.pi)


def joint_exceedance(model: RadialModel, rho: float, u: float, v: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``1 - P(xi <= u, eta <= v)`` computed in tail space."""
    return _exceedance_from_gaps(model, 1.0 - rho, 1.0 - u, 1.0 - v, spec)[0]


def _result(eps, err, n):
    log_cdf = n * math.log1p(-eps) if eps < 1.0 else -math.inf
    return OracleResult(
        joint_cdf=1.0 - eps,
        maxima_cdf=math.exp(log_cdf),
        quadrature_error_bound=n * err,
        exceedance=eps,
        log_maxima_cdf=log_cdf,
        n=n,
    )


def joint_cdf_exact(model: RadialModel, rho: float, u: float, v: float, spec: QuadratureSpec = DEFAULT_SPEC) -> OracleResult:
    """Single-pair df at ``(u, v)``; ``rho = 1`` and ``rho = -1`` use the one-dimensional reductions."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    eps, err = _exceedance_from_gaps(model, 1.0 - rho, 1.0 - u, 1.0 - v, spec)
    return _result(eps, err, 1)


def maxima_cdf_exact(
    model: RadialModel,
    rule: RhoRule,
    n: int,
    x: float,
    y: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    a_n: float | None = None,
) -> OracleResult:
    """``P(M_n1 <= 1 + a_n x, M_n2 <= 1 + a_n y)`` for ``n`` pairs with correlation ``rho_n``.

    The quadrature tolerance is tightened so that ``n`` times its error stays
    near ``1e-9`` or below.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (x < 0 and y < 0):
        raise ValueError("x and y must be negative")
    if a_n is None:
        a_n = solve_a_n(model, n, spec)
    tight = spec.tightened(abs_tol=1e-9 / n * 1e-3, rel_tol=1e-12)
    eps, err = _exceedance_from_gaps(model, rule.one_minus_rho(n), -a_n * x, -a_n * y, tight)
    return _result(eps, err, n)


def _chunk_counts(model, rho, gaps, n, seed, chunk, reps, antithetic):
    """Replications in ``chunk`` whose maxima stay below each ``(u, v)`` threshold pair."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))
    base = reps // 2 if antithetic else reps
    surv_draw = rng.random((base, n))
    theta = rng.random((base, n)) * (2.0 * math.pi) - math.pi
    if antithetic:
        surv_draw = np.concatenate([surv_draw, surv_draw])
        theta = np.concatenate([theta, theta + math.pi])
    cos_xi = np.cos(theta)
    cos_eta = rho * cos_xi + math.sqrt(max(0.0, 1.0 - rho * rho)) * np.sin(theta)

    counts = []
    for gu, gv in gaps:
        hit = np.zeros(surv_draw.shape, dtype=bool)
        for g, c in ((gu, cos_xi), (gv, cos_eta)):
            thr = 1.0 - g
            # R <= thr can exceed nothing: screen those draws before touching the cdf
            cand = (c > thr) & (surv_draw < model.surv(g))
            idx = np.nonzero(cand)
            # R = F^{-1}(1 - V) exceeds thr/c exactly when V < 1 - F(thr/c)
            hit[idx] |= surv_draw[idx] < model.surv(1.0 - thr / c[idx])
        counts.append(int(np.count_nonzero(~hit.any(axis=1))))
    return counts


def sample_threshold_cdf(
    model: RadialModel,
    rho: float,
    n: int,
    thresholds: Sequence[tuple[float, float]],
    mc: McConfig,
    workers: int = 1,
) -> McResult:
    """Monte Carlo estimate of ``P(max of n pairs <= (u, v))`` for each threshold pair.

    Replications are generated in fixed chunks of 1024, each with its own
    Philox stream keyed by ``(seed, chunk index)``; counts are summed, so the
    result is bit-identical for any number of workers.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not -1.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    gaps = [(1.0 - u, 1.0 - v) for u, v in thresholds]
    for gu, gv in gaps:
        _check_gaps(gu, gv)
    sizes = []
    left = mc.replications
    while left > 0:
        sizes.append(min(_CHUNK, left))
        left -= sizes[-1]
    jobs = [(model, rho, gaps, n, mc.seed, i, size, mc.antithetic) for i, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_chunk = list(pool.map(lambda job: _chunk_counts(*job), jobs))
    else:
        per_chunk = [_chunk_counts(*job) for job in jobs]
    totals = [sum(c[k] for c in per_chunk) for k in range(len(gaps))]
    p = [t / mc.replications for t in totals]
    se = [math.sqrt(q * (1.0 - q) / mc.replications) for q in p]
    return McResult(tuple(p), tuple(se), tuple(totals), mc.replications, n)


def sample_maxima(
    model: RadialModel,
    rule: RhoRule,
    n: int,
    mc: McConfig,
    grid: Sequence[tuple[float, float]],
    workers: int = 1,
    spec: QuadratureSpec = DEFAULT_SPEC,
    a_n: float | None = None,
) -> McResult:
    """Monte Carlo estimate of the normalized maxima df on a grid of ``(x, y)``."""
    if mc.replications < 100:
        raise ValueError("sample_maxima needs at least 100 replications")
    if a_n is None:
        a_n = solve_a_n(model, n, spec)
    thresholds = [(1.0 + a_n * x, 1.0 + a_n * y) for x, y in grid]
    return sample_threshold_cdf(model, rule.rho(n), n, thresholds, mc, workers)
