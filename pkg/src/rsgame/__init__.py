"""Exact-arithmetic toolkit for the two-colour Resource Selection Game with
single-peaked utilities."""

from .core import (
    AccessibilityGraph,
    Color,
    GameError,
    Ordering,
    ResourceState,
    UtilitySpec,
    compare_utility,
    eval_p,
    fraction,
    reflect,
    resource_state,
    social_welfare,
    utility_key,
)
from .dynamics import Mode, Move, Outcome, Trace, apply, improving_moves, is_improving, run

__version__ = "0.1.0"
