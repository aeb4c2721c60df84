"""Exhaustive analysis over the full profile space: equilibria, improvement
digraphs, finite-improvement checks and potential-function audits."""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional, Sequence

from .bounds import lower_bound_L, upper_bound_U
from .core import (
    AccessibilityGraph,
    Color,
    GameError,
    ResourceState,
    StrategyProfile,
    UtilitySpec,
    format_rational,
    fraction,
    reflect,
    resource_counts,
    resource_state,
    social_welfare,
)
from .dynamics import KeyTable, Mode, Move, Trace, moves_from_counts

DEFAULT_BUDGET = 10**7
HALF = Fraction(1, 2)


class BudgetExceededError(GameError):
    pass


class PreconditionError(GameError):
    """The potential argument being audited does not apply to this instance."""


# -- profile space ----------------------------------------------------------


class ProfileSpace:
    """Mixed-radix indexing of profiles; agent 0 is the least significant digit."""

    def __init__(self, g: AccessibilityGraph, budget: int = DEFAULT_BUDGET):
        self.graph = g
        self.size = g.profile_count
        if self.size > budget:
            raise BudgetExceededError(
                f"instance has {self.size} strategy profiles, above the budget of {budget}"
            )
        self.radices = [len(qs) for qs in g.access]
        self.strides = []
        stride = 1
        for r in self.radices:
            self.strides.append(stride)
            stride *= r
        self.position = [{q: i for i, q in enumerate(qs)} for qs in g.access]

    def decode(self, index: int) -> StrategyProfile:
        out = []
        for qs, r in zip(self.graph.access, self.radices):
            index, digit = divmod(index, r)
            out.append(qs[digit])
        return tuple(out)

    def encode(self, s: Sequence[int]) -> int:
        return sum(self.position[a][q] * st for a, (q, st) in enumerate(zip(s, self.strides)))

    def neighbour(self, index: int, m: Move) -> int:
        pos = self.position[m.agent]
        return index + (pos[m.target] - pos[m.source]) * self.strides[m.agent]


def enumerate_profiles(g: AccessibilityGraph, budget: int = DEFAULT_BUDGET) -> Iterator[StrategyProfile]:
    space = ProfileSpace(g, budget)
    for i in range(space.size):
        yield space.decode(i)


def _has_improving_move(g: AccessibilityGraph, s: Sequence[int], spec: UtilitySpec, mode: Mode) -> bool:
    # Deliberately independent of dynamics.KeyTable: plain Fractions per move.
    states = [resource_state(g, s, q) for q in range(g.k)]
    for a, qs in enumerate(g.access):
        c = g.colors[a]
        here = reflect(fraction(states[s[a]], c), spec.lam)
        for q in qs:
            if q == s[a]:
                continue
            if mode is Mode.IMPACT_BLIND:
                seen = fraction(states[q], c)
                if seen is not None and reflect(seen, spec.lam) > here:
                    return True
            elif reflect(fraction(states[q].joined(c), c), spec.lam) > here:
                return True
    return False


def find_equilibria(
    g: AccessibilityGraph, spec: UtilitySpec, mode: Mode, budget: int = DEFAULT_BUDGET
) -> list[StrategyProfile]:
    return [s for s in enumerate_profiles(g, budget) if not _has_improving_move(g, s, spec, mode)]


# -- improvement digraph ----------------------------------------------------


def _successors(args) -> list[list[tuple[Move, int]]]:
    g, spec, mode, budget, start, stop = args
    space = ProfileSpace(g, budget)
    table = KeyTable.for_game(g, spec)
    out = []
    for index in range(start, stop):
        s = space.decode(index)
        red, blue = resource_counts(g, s)
        out.append(
            [(m, space.neighbour(index, m)) for m, _ in moves_from_counts(g, s, red, blue, table, mode)]
        )
    return out


@dataclass
class ImprovementDigraph:
    graph: AccessibilityGraph
    spec: UtilitySpec
    mode: Mode
    space: ProfileSpace
    successors: list[list[tuple[Move, int]]]

    @property
    def node_count(self) -> int:
        return self.space.size

    @property
    def edge_count(self) -> int:
        return sum(len(out) for out in self.successors)

    def profile(self, index: int) -> StrategyProfile:
        return self.space.decode(index)

    def edges(self) -> Iterator[tuple[int, Move, int]]:
        for u, out in enumerate(self.successors):
            for m, v in out:
                yield u, m, v

    def sinks(self) -> list[int]:
        return [u for u, out in enumerate(self.successors) if not out]

    def find_cycle(self) -> Optional[list[tuple[int, Move, int]]]:
        """A directed cycle as a list of edges, or None when acyclic.

        Iterative three-colour DFS, roots and successors visited in index order.
        """
        WHITE, GREY, BLACK = 0, 1, 2
        colour = [WHITE] * self.node_count
        for root in range(self.node_count):
            if colour[root] != WHITE:
                continue
            colour[root] = GREY
            path = [root]
            via: list[Move] = []
            cursor = [0]
            while path:
                u = path[-1]
                out = self.successors[u]
                if cursor[-1] == len(out):
                    colour[u] = BLACK
                    path.pop()
                    cursor.pop()
                    if via:
                        via.pop()
                    continue
                m, v = out[cursor[-1]]
                cursor[-1] += 1
                if colour[v] == GREY:
                    start = path.index(v)
                    nodes = path[start:] + [v]
                    moves = via[start:] + [m]
                    return [(nodes[i], moves[i], nodes[i + 1]) for i in range(len(moves))]
                if colour[v] == WHITE:
                    colour[v] = GREY
                    path.append(v)
                    via.append(m)
                    cursor.append(0)
        return None

    def to_dot(self) -> str:
        g = self.graph
        lines = [f"digraph improvement_{self.mode.value} {{"]
        for u in range(self.node_count):
            label = " ".join(f"{a}:{q}" for a, q in g.profile_names(self.profile(u)).items())
            shape = "doublecircle" if not self.successors[u] else "circle"
            lines.append(f'  p{u} [label="{label}", shape={shape}];')
        for u, m, v in self.edges():
            lines.append(
                f'  p{u} -> p{v} [label="{g.agent_names[m.agent]}: '
                f'{g.resource_names[m.source]}->{g.resource_names[m.target]}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_digraph(
    g: AccessibilityGraph,
    spec: UtilitySpec,
    mode: Mode,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> ImprovementDigraph:
    space = ProfileSpace(g, budget)
    if jobs <= 1 or space.size < 4096:
        successors = _successors((g, spec, mode, budget, 0, space.size))
    else:
        chunk = -(-space.size // jobs)
        ranges = [
            (g, spec, mode, budget, lo, min(lo + chunk, space.size))
            for lo in range(0, space.size, chunk)
        ]
        successors = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_successors, ranges):
                successors.extend(part)
    return ImprovementDigraph(g, spec, mode, space, successors)


@dataclass
class FipResult:
    holds: bool
    cycle: list[Move]
    cycle_profiles: list[StrategyProfile]
    digraph: ImprovementDigraph

    def __bool__(self) -> bool:
        return self.holds


def fip_check(
    g: AccessibilityGraph,
    spec: UtilitySpec,
    mode: Mode,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> FipResult:
    """FIP holds exactly when the improvement digraph has no directed cycle."""
    dg = build_digraph(g, spec, mode, budget, jobs)
    cycle = dg.find_cycle()
    if cycle is None:
        return FipResult(True, [], [], dg)
    return FipResult(False, [m for _, m, _ in cycle], [dg.profile(u) for u, _, _ in cycle], dg)


# -- lexicographic potential (impact-blind, linear p) -----------------------


@dataclass(frozen=True, order=True)
class PhiLex:
    """Compared lexicographically in field order."""

    empty_count: int
    mono_counts: tuple[int, ...]
    max_util_count: int
    welfare: Fraction

    def to_json(self) -> dict:
        return {
            "empty_count": self.empty_count,
            "mono_counts": list(self.mono_counts),
            "max_util_count": self.max_util_count,
            "welfare": format_rational(self.welfare),
        }


def phi_lex(g: AccessibilityGraph, s: Sequence[int], spec: UtilitySpec) -> PhiLex:
    spec.require_linear()
    delta = g.max_resource_degree
    red, blue = resource_counts(g, s)
    empty = 0
    mono = [0] * delta
    top = 0
    for r, b in zip(red, blue):
        if r == 0 and b == 0:
            empty += 1
        elif r == 0 or b == 0:
            mono[r + b - 1] += 1
        if r == delta - 1 or b == delta - 1:
            top += 1
    return PhiLex(empty, tuple(mono), top, social_welfare(g, s, spec))


@dataclass
class Violation:
    step: int
    before: object
    after: object
    reason: str = ""

    def to_json(self) -> dict:
        render = lambda x: x.to_json() if hasattr(x, "to_json") else x  # noqa: E731
        return {"step": self.step, "before": render(self.before), "after": render(self.after), "reason": self.reason}


def _bound_delta(g: AccessibilityGraph) -> int:
    return max(g.max_resource_degree, 2)


def require_phi_lex_preconditions(g: AccessibilityGraph, spec: UtilitySpec) -> None:
    if not spec.is_linear:
        raise PreconditionError("the lexicographic potential needs a linear p")
    bound = lower_bound_L(_bound_delta(g))
    if spec.lam < bound:
        raise PreconditionError(
            f"lambda {format_rational(spec.lam)} is below L = {format_rational(bound)}"
        )


def audit_phi_lex(g: AccessibilityGraph, trace: Trace, spec: UtilitySpec) -> Optional[Violation]:
    """First step of an impact-blind trace where PhiLex fails to strictly increase."""
    if trace.mode is not Mode.IMPACT_BLIND:
        raise PreconditionError("the lexicographic potential applies to impact-blind traces")
    require_phi_lex_preconditions(g, spec)
    before = phi_lex(g, trace.initial, spec)
    for i, st in enumerate(trace.steps):
        after = phi_lex(g, st.profile, spec)
        if not after > before:
            return Violation(i, before, after, "potential did not increase")
        before = after
    return None


def audit_digraph_phi_lex(dg: ImprovementDigraph) -> Optional[tuple[int, Move, int]]:
    """First impact-blind edge whose endpoints do not strictly increase PhiLex."""
    require_phi_lex_preconditions(dg.graph, dg.spec)
    values = [phi_lex(dg.graph, dg.profile(u), dg.spec) for u in range(dg.node_count)]
    for u, m, v in dg.edges():
        if not values[v] > values[u]:
            return u, m, v
    return None


# -- majority potential (impact-aware, small lambda) ------------------------


def phi_majority(g: AccessibilityGraph, s: Sequence[int]) -> int:
    red, blue = resource_counts(g, s)
    return sum(max(r, b) for r, b in zip(red, blue))


class MoveClass(enum.Enum):
    MAJORITY_TO_MINORITY = "majority-to-minority"
    MAJORITY_TO_MAJORITY = "majority-to-majority"
    MINORITY_TO_MINORITY = "minority-to-minority"
    MINORITY_TO_MAJORITY = "minority-to-majority"
    TIE_INVOLVED = "tie-involved"


def classify_move(g: AccessibilityGraph, s: Sequence[int], m: Move) -> MoveClass:
    """Classify by the mover's colour share at both endpoints before the move.

    Source share counts the mover, target share does not. A source share of
    exactly 1/2 or 1, and an empty target, are TIE_INVOLVED. At the target a
    share of 1/2 or more is a majority.
    """
    c = g.colors[m.agent]
    src = fraction(resource_state(g, s, m.source), c)
    dst = fraction(resource_state(g, s, m.target), c)
    if dst is None or src == HALF or src == 1:
        return MoveClass.TIE_INVOLVED
    src_major = src > HALF
    dst_major = dst >= HALF
    if src_major:
        return MoveClass.MAJORITY_TO_MAJORITY if dst_major else MoveClass.MAJORITY_TO_MINORITY
    return MoveClass.MINORITY_TO_MAJORITY if dst_major else MoveClass.MINORITY_TO_MINORITY


def require_phi_majority_preconditions(g: AccessibilityGraph, spec: UtilitySpec) -> None:
    bound = upper_bound_U(_bound_delta(g))
    if spec.lam > bound:
        raise PreconditionError(
            f"lambda {format_rational(spec.lam)} is above U = {format_rational(bound)}"
        )


def _majority_step_violation(g, s, m, before: int, after: int) -> Optional[str]:
    if after > before:
        return "majority potential increased"
    if classify_move(g, s, m) is MoveClass.MAJORITY_TO_MINORITY and after != before - 1:
        return "majority-to-minority move did not decrease the potential by one"
    return None


def audit_phi_majority(g: AccessibilityGraph, trace: Trace, spec: UtilitySpec) -> Optional[Violation]:
    if trace.mode is not Mode.IMPACT_AWARE:
        raise PreconditionError("the majority potential applies to impact-aware traces")
    require_phi_majority_preconditions(g, spec)
    s = trace.initial
    before = phi_majority(g, s)
    for i, st in enumerate(trace.steps):
        after = phi_majority(g, st.profile)
        reason = _majority_step_violation(g, s, st.move, before, after)
        if reason:
            return Violation(i, before, after, reason)
        s, before = st.profile, after
    return None


def audit_digraph_phi_majority(dg: ImprovementDigraph) -> Optional[tuple[int, Move, int]]:
    require_phi_majority_preconditions(dg.graph, dg.spec)
    g = dg.graph
    values = [phi_majority(g, dg.profile(u)) for u in range(dg.node_count)]
    for u, m, v in dg.edges():
        if _majority_step_violation(g, dg.profile(u), m, values[u], values[v]):
            return u, m, v
    return None


# -- extremal shares around a single move -----------------------------------


def minority_share(state: ResourceState) -> Optional[Fraction]:
    """Smaller colour share if it lies in (0, 1/2)."""
    if state.empty:
        return None
    x = Fraction(min(state.red, state.blue), state.total)
    return x if 0 < x < HALF else None


def majority_share(state: ResourceState) -> Optional[Fraction]:
    """Larger colour share if it lies in [1/2, 1)."""
    if state.empty:
        return None
    x = Fraction(max(state.red, state.blue), state.total)
    return x if HALF <= x < 1 else None


class ExtremalReport(NamedTuple):
    max_minority_before: Optional[Fraction]
    max_minority_after: Optional[Fraction]
    max_majority_before: Optional[Fraction]
    max_majority_after: Optional[Fraction]


def _max_defined(values) -> Optional[Fraction]:
    present = [v for v in values if v is not None]
    return max(present) if present else None


def extremal_fraction_report(
    g: AccessibilityGraph,
    s: Sequence[int],
    s_after: Sequence[int],
    q_from: int,
    q_to: int,
) -> ExtremalReport:
    before = [resource_state(g, s, q) for q in (q_from, q_to)]
    after = [resource_state(g, s_after, q) for q in (q_from, q_to)]
    return ExtremalReport(
        _max_defined(minority_share(x) for x in before),
        _max_defined(minority_share(x) for x in after),
        _max_defined(majority_share(x) for x in before),
        _max_defined(majority_share(x) for x in after),
    )


def extremal_report_for_states(
    source: ResourceState, target: ResourceState, mover: Color
) -> ExtremalReport:
    """Same report from bare endpoint states (mover counted at ``source``)."""
    pairs = [(source, target), (source.left(mover), target.joined(mover))]
    return ExtremalReport(
        _max_defined(minority_share(x) for x in pairs[0]),
        _max_defined(minority_share(x) for x in pairs[1]),
        _max_defined(majority_share(x) for x in pairs[0]),
        _max_defined(majority_share(x) for x in pairs[1]),
    )


def strictly_decreased(before: Optional[Fraction], after: Optional[Fraction]) -> bool:
    """Absent after a present value counts as a decrease."""
    if before is None:
        return False
    return after is None or after < before

