"""Exact domain model for the two-colour Resource Selection Game.

All arithmetic uses :class:`fractions.Fraction`. Utilities are never
materialised for an unspecified single-peaked ``p``; instead each fraction is
mapped to its *utility key* (the fraction reflected into ``[0, lambda]``),
whose ordering coincides with the ordering of ``p`` for every strictly
increasing instantiation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple

Rational = Fraction

# An agent's strategy is the index of its chosen resource; a profile holds one
# entry per agent, in agent order.
StrategyProfile = Tuple[int, ...]


class GameError(ValueError):
    """Base class for contract violations raised by this package."""


class NotEvaluableError(GameError):
    pass


class Color(enum.Enum):
    RED = "red"
    BLUE = "blue"

    @property
    def opposite(self) -> "Color":
        return Color.BLUE if self is Color.RED else Color.RED

    @classmethod
    def parse(cls, text: str) -> "Color":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise GameError(f"unknown color {text!r}") from None


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(value, float):
        raise GameError("floating point values are not accepted; use 'p/q'")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise GameError(f"malformed rational {value!r}") from None
    return Fraction(value)


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ResourceState:
    red: int = 0
    blue: int = 0

    @property
    def total(self) -> int:
        return self.red + self.blue

    @property
    def empty(self) -> bool:
        return self.total == 0

    @property
    def monochromatic(self) -> bool:
        return (self.red == 0) != (self.blue == 0)

    def count(self, c: Color) -> int:
        return self.red if c is Color.RED else self.blue

    def joined(self, c: Color) -> "ResourceState":
        if c is Color.RED:
            return ResourceState(self.red + 1, self.blue)
        return ResourceState(self.red, self.blue + 1)

    def left(self, c: Color) -> "ResourceState":
        if self.count(c) == 0:
            raise GameError(f"no {c.value} agent to remove from {self}")
        if c is Color.RED:
            return ResourceState(self.red - 1, self.blue)
        return ResourceState(self.red, self.blue - 1)


def fraction(state: ResourceState, c: Color) -> Optional[Fraction]:
    """Share of colour ``c`` at a resource; ``None`` for an empty resource."""
    if state.empty:
        return None
    return Fraction(state.count(c), state.total)


def _check_lambda(lam: Fraction) -> None:
    if not 0 < lam < 1:
        raise GameError(f"lambda must lie in (0, 1), got {lam}")


def reflect(x: Fraction, lam: Fraction) -> Fraction:
    """Map ``x`` onto the increasing branch ``[0, lam]`` of p."""
    if not 0 <= x <= 1:
        raise GameError(f"fraction {x} outside [0, 1]")
    if x <= lam:
        return x
    return lam * (1 - x) / (1 - lam)


def compare_utility(x: Fraction, y: Fraction, lam: Fraction) -> Ordering:
    """Order p(x) against p(y), valid for every strictly increasing p."""
    kx, ky = reflect(x, lam), reflect(y, lam)
    if kx < ky:
        return Ordering.LESS
    if kx > ky:
        return Ordering.GREATER
    return Ordering.EQUAL


@dataclass(frozen=True)
class UtilitySpec:
    """Peak ``lam`` plus the shape of p.

    ``slope is None`` means the abstract shape: only orderings are available.
    Otherwise p is linear, ``p(x) = slope * x`` on ``[0, lam]``.
    """

    lam: Fraction
    slope: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "lam", as_rational(self.lam))
        _check_lambda(self.lam)
        if self.slope is not None:
            object.__setattr__(self, "slope", as_rational(self.slope))
            if self.slope <= 0:
                raise GameError(f"linear slope must be positive, got {self.slope}")

    @classmethod
    def linear(cls, lam, slope=1) -> "UtilitySpec":
        return cls(as_rational(lam), as_rational(slope))

    @property
    def is_linear(self) -> bool:
        return self.slope is not None

    def key(self, x: Fraction) -> Fraction:
        return reflect(x, self.lam)

    def require_linear(self) -> Fraction:
        if self.slope is None:
            raise NotEvaluableError("p not numerically evaluable (abstract shape)")
        return self.slope


def eval_p(x: Fraction, spec: UtilitySpec) -> Fraction:
    slope = spec.require_linear()
    return slope * reflect(x, spec.lam)


@dataclass(frozen=True)
class AccessibilityGraph:
    """Bipartite board: agents on one side, resources on the other.

    Agents and resources are dense indices; the names are kept only for I/O.
    ``access[a]`` is the sorted tuple of resources agent ``a`` may choose.
    """

    resource_names: Tuple[str, ...]
    agent_names: Tuple[str, ...]
    colors: Tuple[Color, ...]
    access: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.agent_names) != len(self.colors) or len(self.agent_names) != len(self.access):
            raise GameError("agent names, colors and access lists differ in length")
        names = list(self.resource_names) + list(self.agent_names)
        if len(set(names)) != len(names):
            raise GameError("vertex names must be unique across agents and resources")
        k = len(self.resource_names)
        for a, qs in enumerate(self.access):
            if not qs:
                raise GameError(f"agent {self.agent_names[a]!r} has no accessible resource")
            if list(qs) != sorted(set(qs)):
                raise GameError(f"access list of {self.agent_names[a]!r} must be sorted and unique")
            if qs[0] < 0 or qs[-1] >= k:
                raise GameError(f"agent {self.agent_names[a]!r} references an unknown resource")

    @classmethod
    def build(
        cls,
        resources: Sequence[str],
        agents: Sequence[Tuple[str, Color]],
        edges: Iterable[Tuple[str, str]],
    ) -> "AccessibilityGraph":
        r_index = {name: i for i, name in enumerate(resources)}
        a_index = {name: i for i, (name, _) in enumerate(agents)}
        if len(r_index) != len(resources) or len(a_index) != len(agents):
            raise GameError("duplicate resource or agent name")
        access: list[set[int]] = [set() for _ in agents]
        for a_name, q_name in edges:
            if a_name not in a_index:
                raise GameError(f"edge references unknown agent {a_name!r}")
            if q_name not in r_index:
                raise GameError(f"edge references unknown resource {q_name!r}")
            access[a_index[a_name]].add(r_index[q_name])
        return cls(
            tuple(resources),
            tuple(name for name, _ in agents),
            tuple(Color.parse(c) if isinstance(c, str) else c for _, c in agents),
            tuple(tuple(sorted(qs)) for qs in access),
        )

    @property
    def n(self) -> int:
        return len(self.agent_names)

    @property
    def k(self) -> int:
        return len(self.resource_names)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(a, q) for a, qs in enumerate(self.access) for q in qs]

    def agent_degree(self, a: int) -> int:
        return len(self.access[a])

    @cached_property
    def resource_degrees(self) -> Tuple[int, ...]:
        deg = [0] * self.k
        for qs in self.access:
            for q in qs:
                deg[q] += 1
        return tuple(deg)

    def resource_degree(self, q: int) -> int:
        return self.resource_degrees[q]

    def agents_of(self, q: int) -> list[int]:
        return [a for a, qs in enumerate(self.access) if q in qs]

    @property
    def max_resource_degree(self) -> int:
        """Delta(Q): the largest resource degree (0 for a board without resources)."""
        return max(self.resource_degrees, default=0)

    @property
    def profile_count(self) -> int:
        total = 1
        for qs in self.access:
            total *= len(qs)
        return total

    def resource_id(self, name: str) -> int:
        try:
            return self.resource_names.index(name)
        except ValueError:
            raise GameError(f"unknown resource {name!r}") from None

    def agent_id(self, name: str) -> int:
        try:
            return self.agent_names.index(name)
        except ValueError:
            raise GameError(f"unknown agent {name!r}") from None

    def check_profile(self, s: Sequence[int]) -> StrategyProfile:
        if len(s) != self.n:
            raise GameError(f"profile has {len(s)} entries for {self.n} agents")
        for a, q in enumerate(s):
            if q not in self.access[a]:
                raise GameError(
                    f"agent {self.agent_names[a]!r} cannot use resource index {q}"
                )
        return tuple(s)

    def profile_from_names(self, choice: dict) -> StrategyProfile:
        missing = set(self.agent_names) - set(choice)
        if missing:
            raise GameError(f"profile lacks agents {sorted(missing)}")
        return self.check_profile([self.resource_id(choice[name]) for name in self.agent_names])

    def profile_names(self, s: Sequence[int]) -> dict:
        return {self.agent_names[a]: self.resource_names[q] for a, q in enumerate(s)}

    def default_profile(self) -> StrategyProfile:
        return tuple(qs[0] for qs in self.access)

    def is_tree(self) -> bool:
        """Connected and acyclic (as an undirected bipartite graph)."""
        vertices = self.n + self.k
        if len(self.edges) != vertices - 1:
            return False
        adj: list[list[int]] = [[] for _ in range(vertices)]
        for a, q in self.edges:
            adj[a].append(self.n + q)
            adj[self.n + q].append(a)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == vertices


def resource_counts(g: AccessibilityGraph, s: Sequence[int]) -> tuple[list[int], list[int]]:
    """Per-resource red and blue tallies for a profile."""
    red = [0] * g.k
    blue = [0] * g.k
    for a, q in enumerate(s):
        if g.colors[a] is Color.RED:
            red[q] += 1
        else:
            blue[q] += 1
    return red, blue


def resource_state(g: AccessibilityGraph, s: Sequence[int], q: int) -> ResourceState:
    if not 0 <= q < g.k:
        raise GameError(f"unknown resource index {q}")
    red = blue = 0
    for a, choice in enumerate(s):
        if choice == q:
            if g.colors[a] is Color.RED:
                red += 1
            else:
                blue += 1
    return ResourceState(red, blue)


def own_fraction(g: AccessibilityGraph, s: Sequence[int], a: int) -> Fraction:
    st = resource_state(g, s, s[a])
    return Fraction(st.count(g.colors[a]), st.total)


def utility_key(g: AccessibilityGraph, s: Sequence[int], a: int, spec: UtilitySpec) -> Fraction:
    return reflect(own_fraction(g, s, a), spec.lam)


def welfare_at(state: ResourceState, spec: UtilitySpec) -> Fraction:
    """W_q: summed utility of the agents sitting at one resource."""
    slope = spec.require_linear()
    if state.empty:
        return Fraction(0)
    total = Fraction(0)
    for c in Color:
        m = state.count(c)
        if m:
            total += m * slope * reflect(Fraction(m, state.total), spec.lam)
    return total


def social_welfare(g: AccessibilityGraph, s: Sequence[int], spec: UtilitySpec) -> Fraction:
    spec.require_linear()
    red, blue = resource_counts(g, s)
    return sum(
        (welfare_at(ResourceState(r, b), spec) for r, b in zip(red, blue)),
        Fraction(0),
    )
