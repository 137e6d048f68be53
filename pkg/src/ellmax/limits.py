"""Regime classification and the first-order limit law ``H_{alpha+1/2, lambda}``."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .specfun import psi_alpha

__all__ = [
    "RegimeLabel",
    "Regime",
    "EvalPoint",
    "AmbiguousRegimeError",
    "standardized_args",
    "classify_regime",
    "boundary_point",
    "h_limit",
]


class RegimeLabel(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY_NEAR = "BoundaryNear"
    BOUNDARY_FAR_Y = "BoundaryFarY"
    BOUNDARY_FAR_X = "BoundaryFarX"
    EXTERIOR_BOTH = "ExteriorBoth"
    EXTERIOR_Y_FAR = "ExteriorYFar"
    EXTERIOR_X_FAR = "ExteriorXFar"
    LAMBDA_ZERO = "LambdaZero"
    LAMBDA_INF = "LambdaInf"

    def __str__(self):
        return self.value

    @property
    def is_boundary(self) -> bool:
        return self in _BOUNDARY

    @property
    def is_exterior(self) -> bool:
        return self in _EXTERIOR

    @property
    def is_degenerate(self) -> bool:
        return self in (RegimeLabel.LAMBDA_ZERO, RegimeLabel.LAMBDA_INF)


_BOUNDARY = (RegimeLabel.BOUNDARY_NEAR, RegimeLabel.BOUNDARY_FAR_Y, RegimeLabel.BOUNDARY_FAR_X)
_EXTERIOR = (RegimeLabel.EXTERIOR_BOTH, RegimeLabel.EXTERIOR_Y_FAR, RegimeLabel.EXTERIOR_X_FAR)


class AmbiguousRegimeError(ValueError):
    """``|D|`` is within tolerance but the point lies on no boundary curve."""


@dataclass(frozen=True)
class Regime:
    """Regime of ``(x, y)`` for a given ``lambda``.

    ``z_x`` and ``z_y`` are the unclamped standardized arguments of ``psi``
    (NaN when ``lambda`` is 0 or infinite, where ``D`` is NaN as well).
    """

    label: RegimeLabel
    D: float
    z_x: float = math.nan
    z_y: float = math.nan


@dataclass(frozen=True)
class EvalPoint:
    x: float
    y: float
    regime: Regime

    def __post_init__(self):
        if not (self.x < 0 and self.y < 0):
            raise ValueError(f"evaluation points need x, y < 0, got ({self.x!r}, {self.y!r})")


def _check_xy(x, y):
    if not (x < 0 and y < 0):
        raise ValueError(f"x and y must be negative, got ({x!r}, {y!r})")


def standardized_args(lam: float, x: float, y: float) -> tuple[float, float]:
    """``((lam + (y-x)/(2 lam))/sqrt(2|x|), (lam + (x-y)/(2 lam))/sqrt(2|y|))``."""
    half = 0.5 / lam
    return (lam + (y - x) * half) / math.sqrt(-2.0 * x), (lam + (x - y) * half) / math.sqrt(-2.0 * y)


def _discriminant(lam, x, y):
    return lam * lam + x + y + (x - y) ** 2 / (4.0 * lam * lam)


def classify_regime(x: float, y: float, lam: float, boundary_tol: float = 1e-9) -> Regime:
    """Classify ``(x, y)`` by the sign of ``D`` and the boundary branch.

    On ``D = 0`` both standardized arguments are exactly ``+-1``; the branch
    follows from their signs. Points with both at ``+1`` form the near curve
    ``sqrt(-x) + sqrt(-y) = sqrt(2) lam``.
    """
    _check_xy(x, y)
    if boundary_tol < 0:
        raise ValueError("boundary_tol must be nonnegative")
    if lam == 0:
        return Regime(RegimeLabel.LAMBDA_ZERO, math.nan)
    if math.isinf(lam):
        return Regime(RegimeLabel.LAMBDA_INF, math.nan)
    if not lam > 0:
        raise ValueError(f"lambda must be nonnegative, got {lam!r}")

    d = _discriminant(lam, x, y)
    z_x, z_y = standardized_args(lam, x, y)
    rx, ry, r2 = math.sqrt(-x), math.sqrt(-y), math.sqrt(2.0) * lam
    if abs(d) <= boundary_tol:
        if z_x < 0:
            label, resid = RegimeLabel.BOUNDARY_FAR_Y, ry - rx - r2
        elif z_y < 0:
            label, resid = RegimeLabel.BOUNDARY_FAR_X, rx - ry - r2
        else:
            label, resid = RegimeLabel.BOUNDARY_NEAR, rx + ry - r2
        if abs(resid) > math.sqrt(boundary_tol) + 1e-12:
            raise AmbiguousRegimeError(
                f"|D|={abs(d):.3e} within tolerance but ({x!r}, {y!r}) misses the "
                f"{label.value} curve by {abs(resid):.3e}"
            )
        return Regime(label, d, z_x, z_y)
    if d < 0:
        return Regime(RegimeLabel.INTERIOR, d, z_x, z_y)
    if z_x < 0:
        return Regime(RegimeLabel.EXTERIOR_Y_FAR, d, z_x, z_y)
    if z_y < 0:
        return Regime(RegimeLabel.EXTERIOR_X_FAR, d, z_x, z_y)
    return Regime(RegimeLabel.EXTERIOR_BOTH, d, z_x, z_y)


def boundary_point(branch: str, lam: float, x: float | None = None, y: float | None = None) -> tuple[float, float]:
    """Exact point on a boundary curve, given one free coordinate.

    ``near`` takes either coordinate (which must satisfy ``sqrt(-coord) < sqrt(2) lam``),
    ``far_y`` takes ``x`` and ``far_x`` takes ``y``.
    """
    if not 0 < lam < math.inf:
        raise ValueError("boundary points need a finite positive lambda")
    r2 = math.sqrt(2.0) * lam
    if branch == "near":
        if (x is None) == (y is None):
            raise ValueError("near branch needs exactly one of x, y")
        free = x if x is not None else y
        if not (free < 0 and math.sqrt(-free) < r2):
            raise ValueError("near branch needs -(sqrt(2) lam)**2 < coordinate < 0")
        other = -((r2 - math.sqrt(-free)) ** 2)
        return (free, other) if x is not None else (other, free)
    if branch == "far_y":
        if x is None or not x < 0:
            raise ValueError("far_y branch needs a negative x")
        return x, -((r2 + math.sqrt(-x)) ** 2)
    if branch == "far_x":
        if y is None or not y < 0:
            raise ValueError("far_x branch needs a negative y")
        return -((r2 + math.sqrt(-y)) ** 2), y
    raise ValueError(f"unknown boundary branch {branch!r}")


def h_limit(alpha: float, lam: float, x: float, y: float) -> float:
    """Limit df of the normalized maxima at ``(x, y)``.

    ``lam = 0`` gives ``exp(-|min(x, y)|**(alpha+1/2))``; ``lam = inf`` gives
    the independent limit ``exp(-|x|**(alpha+1/2) - |y|**(alpha+1/2))``.
    """
    _check_xy(x, y)
    p = alpha + 0.5
    if lam == 0:
        return math.exp(-(abs(min(x, y)) ** p))
    if math.isinf(lam):
        return math.exp(-(abs(x) ** p) - abs(y) ** p)
    z_x, z_y = standardized_args(lam, x, y)
    return math.exp(-(abs(x) ** p) * psi_alpha(alpha, z_x) - abs(y) ** p * psi_alpha(alpha, z_y))
