"""Closed-form thresholds on the peak that make utilities monotone over the
fractions a resource of bounded degree can actually exhibit."""

from __future__ import annotations

import enum
from fractions import Fraction

from .core import GameError, as_rational


class Regime(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    MIXED = "mixed"


def _check_delta(delta: int) -> None:
    if delta < 2:
        raise GameError(f"maximum resource degree must be at least 2, got {delta}")


def lower_bound_L(delta: int) -> Fraction:
    """Smallest peak for which larger own-colour shares are never worse."""
    _check_delta(delta)
    return Fraction(delta * (delta - 2), delta * delta - delta - 1)


def upper_bound_U(delta: int) -> Fraction:
    """Largest peak for which smaller own-colour shares are never worse."""
    _check_delta(delta)
    return Fraction(delta - 1, delta * delta - delta - 1)


def order_threshold(x, y) -> Fraction:
    """The peak above which p(x) < p(y), for 0 < x < y < 1."""
    x, y = as_rational(x), as_rational(y)
    if not 0 < x < y < 1:
        raise GameError(f"need 0 < x < y < 1, got x={x}, y={y}")
    return x / (1 - y + x)


def regime(lam, delta: int) -> Regime:
    lam = as_rational(lam)
    if lam >= lower_bound_L(delta):
        return Regime.INCREASING
    if lam <= upper_bound_U(delta):
        return Regime.DECREASING
    return Regime.MIXED


def achievable_fractions(delta: int) -> list[Fraction]:
    """Sorted shares in (0, 1) realisable at a resource holding at most ``delta`` agents."""
    return sorted({Fraction(x, y) for y in range(2, delta + 1) for x in range(1, y)})
