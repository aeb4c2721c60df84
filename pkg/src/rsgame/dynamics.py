"""Improving moves under impact-blind / impact-aware semantics, schedulers,
and best-response traces."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, NamedTuple, Optional, Sequence

from .core import (
    AccessibilityGraph,
    Color,
    GameError,
    StrategyProfile,
    UtilitySpec,
    fraction,
    reflect,
    resource_counts,
    resource_state,
)


class Mode(enum.Enum):
    IMPACT_BLIND = "ib"
    IMPACT_AWARE = "ia"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        try:
            return cls(text.lower())
        except ValueError:
            raise GameError(f"unknown mode {text!r} (expected 'ib' or 'ia')") from None


class Move(NamedTuple):
    agent: int
    source: int
    target: int


class KeyTable:
    """Utility keys for every (own count, occupancy) pair up to ``capacity``.

    ``rank[total][own]`` is an integer whose order equals the exact order of
    the keys, so hot loops compare ints instead of Fractions.
    """

    def __init__(self, lam: Fraction, capacity: int):
        self.lam = lam
        self.capacity = max(capacity, 1)
        self.key = [
            [reflect(Fraction(own, total), lam) if total else None for own in range(total + 1)]
            for total in range(self.capacity + 1)
        ]
        distinct = sorted({x for row in self.key for x in row if x is not None})
        position = {x: i for i, x in enumerate(distinct)}
        self.rank = [[position[x] if x is not None else -1 for x in row] for row in self.key]

    @classmethod
    def for_game(cls, g: AccessibilityGraph, spec: UtilitySpec) -> "KeyTable":
        return cls(spec.lam, g.max_resource_degree)


def _counts_for(color: Color, red: list[int], blue: list[int]) -> tuple[list[int], list[int]]:
    return (red, blue) if color is Color.RED else (blue, red)


def _validate_move(g: AccessibilityGraph, s: Sequence[int], m: Move) -> None:
    if not 0 <= m.agent < g.n:
        raise GameError(f"unknown agent index {m.agent}")
    if s[m.agent] != m.source:
        raise GameError(f"move {m} does not start at the agent's current resource")
    if m.target == m.source:
        raise GameError(f"move {m} does not change the strategy")
    if m.target not in g.access[m.agent]:
        raise GameError(f"resource {m.target} is not accessible to agent {m.agent}")


def _gain(own: list[int], other: list[int], dst: int, table: KeyTable, mode: Mode) -> Optional[int]:
    """Rank of the compared target utility, or None when the target offers nothing."""
    o, t = own[dst], other[dst]
    if mode is Mode.IMPACT_BLIND:
        if o + t == 0:
            return None
        return table.rank[o + t][o]
    return table.rank[o + t + 1][o + 1]


def is_improving(
    g: AccessibilityGraph, s: Sequence[int], m: Move, spec: UtilitySpec, mode: Mode
) -> bool:
    _validate_move(g, s, m)
    # One move needs two keys, so skip the rank table used for bulk scans.
    c = g.colors[m.agent]
    current = reflect(fraction(resource_state(g, s, m.source), c), spec.lam)
    target = resource_state(g, s, m.target)
    if mode is Mode.IMPACT_BLIND:
        seen = fraction(target, c)
        return seen is not None and reflect(seen, spec.lam) > current
    return reflect(fraction(target.joined(c), c), spec.lam) > current


def moves_from_counts(
    g: AccessibilityGraph,
    s: Sequence[int],
    red: list[int],
    blue: list[int],
    table: KeyTable,
    mode: Mode,
) -> list[tuple[Move, int]]:
    """Improving moves paired with the rank of what the mover compares against."""
    found = []
    for a, qs in enumerate(g.access):
        if len(qs) < 2:
            continue
        src = s[a]
        own, other = _counts_for(g.colors[a], red, blue)
        current = table.rank[own[src] + other[src]][own[src]]
        for dst in qs:
            if dst == src:
                continue
            offered = _gain(own, other, dst, table, mode)
            if offered is not None and offered > current:
                found.append((Move(a, src, dst), offered))
    return found


def improving_moves(
    g: AccessibilityGraph, s: Sequence[int], spec: UtilitySpec, mode: Mode
) -> list[Move]:
    """All improving moves, ordered by agent index and then target index."""
    red, blue = resource_counts(g, s)
    table = KeyTable.for_game(g, spec)
    return [m for m, _ in moves_from_counts(g, s, red, blue, table, mode)]


def apply(s: Sequence[int], m: Move) -> StrategyProfile:
    if s[m.agent] != m.source or m.source == m.target:
        raise GameError(f"move {m} is not applicable to profile {tuple(s)}")
    out = list(s)
    out[m.agent] = m.target
    return tuple(out)


# -- schedulers -------------------------------------------------------------


class Scheduler:
    name = "abstract"
    deterministic = True

    def choose(self, g, s, candidates: list[tuple[Move, int]]) -> Move:
        raise NotImplementedError

    @property
    def state(self) -> Hashable:
        return None


class FirstImproving(Scheduler):
    name = "first"

    def choose(self, g, s, candidates):
        return candidates[0][0]


class RoundRobin(Scheduler):
    """Cycle through agents; the first one able to improve plays its best move.

    Best means the largest compared key (post-move for impact-aware, perceived
    for impact-blind); ties go to the lowest resource index.
    """

    name = "round-robin"

    def __init__(self):
        self.pointer = 0

    def choose(self, g, s, candidates):
        by_agent: dict[int, list[tuple[Move, int]]] = {}
        for m, offered in candidates:
            by_agent.setdefault(m.agent, []).append((m, offered))
        for step in range(g.n):
            a = (self.pointer + step) % g.n
            if a in by_agent:
                best = max(by_agent[a], key=lambda c: (c[1], -c[0].target))[0]
                self.pointer = (a + 1) % g.n
                return best
        raise GameError("round-robin scheduler called without candidates")

    @property
    def state(self):
        return self.pointer


class RandomChoice(Scheduler):
    name = "random"
    deterministic = False

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def choose(self, g, s, candidates):
        return self.rng.choice(candidates)[0]


SCHEDULERS = {"first": FirstImproving, "round-robin": RoundRobin, "random": RandomChoice}


def make_scheduler(name: str, seed: int = 0) -> Scheduler:
    if name == "random":
        return RandomChoice(seed)
    try:
        return SCHEDULERS[name]()
    except KeyError:
        raise GameError(f"unknown scheduler {name!r}") from None


# -- traces -----------------------------------------------------------------


class Outcome(enum.Enum):
    EQUILIBRIUM = "equilibrium"
    STEP_LIMIT = "step-limit"
    PROFILE_REVISITED = "profile-revisited"


class Step(NamedTuple):
    move: Move
    profile: StrategyProfile


@dataclass
class Trace:
    """A best-response run.

    ``revisit_index`` indexes :attr:`profiles` (0 is the initial profile). For
    a deterministic scheduler the run stops there with PROFILE_REVISITED; for
    the random scheduler it only records the first repetition.
    """

    initial: StrategyProfile
    mode: Mode
    steps: list[Step] = field(default_factory=list)
    outcome: Outcome = Outcome.STEP_LIMIT
    revisit_index: Optional[int] = None
    scheduler: str = "first"

    @property
    def profiles(self) -> list[StrategyProfile]:
        return [self.initial] + [st.profile for st in self.steps]

    @property
    def final(self) -> StrategyProfile:
        return self.steps[-1].profile if self.steps else self.initial

    @classmethod
    def from_moves(cls, initial: Sequence[int], moves: Sequence[Move], mode: Mode) -> "Trace":
        """Replay moves verbatim, improving or not (used to build audit inputs)."""
        trace = cls(tuple(initial), mode)
        s = trace.initial
        for m in moves:
            s = apply(s, m)
            trace.steps.append(Step(m, s))
        return trace


def run(
    g: AccessibilityGraph,
    s0: Sequence[int],
    spec: UtilitySpec,
    mode: Mode,
    scheduler: Optional[Scheduler] = None,
    max_steps: int = 10_000,
) -> Trace:
    if max_steps < 0:
        raise GameError("max_steps must be non-negative")
    scheduler = scheduler or FirstImproving()
    s = g.check_profile(s0)
    table = KeyTable.for_game(g, spec)
    trace = Trace(s, mode, scheduler=scheduler.name)
    seen = {(s, scheduler.state): 0}
    while True:
        red, blue = resource_counts(g, s)
        candidates = moves_from_counts(g, s, red, blue, table, mode)
        if not candidates:
            trace.outcome = Outcome.EQUILIBRIUM
            return trace
        if len(trace.steps) >= max_steps:
            trace.outcome = Outcome.STEP_LIMIT
            return trace
        m = scheduler.choose(g, s, candidates)
        s = apply(s, m)
        trace.steps.append(Step(m, s))
        marker = (s, scheduler.state)
        if marker in seen:
            if scheduler.deterministic:
                trace.revisit_index = seen[marker]
                trace.outcome = Outcome.PROFILE_REVISITED
                return trace
            if trace.revisit_index is None:
                trace.revisit_index = seen[marker]
        else:
            seen[marker] = len(trace.steps)


def trace_to_json(g: AccessibilityGraph, trace: Trace) -> dict:
    return {
        "mode": trace.mode.value,
        "scheduler": trace.scheduler,
        "initial": g.profile_names(trace.initial),
        "steps": [
            {
                "agent": g.agent_names[st.move.agent],
                "from": g.resource_names[st.move.source],
                "to": g.resource_names[st.move.target],
            }
            for st in trace.steps
        ],
        "outcome": {"kind": trace.outcome.value, "index": trace.revisit_index},
    }


def trace_from_json(g: AccessibilityGraph, data: dict) -> Trace:
    initial = g.profile_from_names(data["initial"])
    moves = [
        Move(g.agent_id(st["agent"]), g.resource_id(st["from"]), g.resource_id(st["to"]))
        for st in data["steps"]
    ]
    trace = Trace.from_moves(initial, moves, Mode.parse(data["mode"]))
    trace.scheduler = data.get("scheduler", "first")
    outcome = data.get("outcome", {})
    trace.outcome = Outcome(outcome.get("kind", Outcome.STEP_LIMIT.value))
    trace.revisit_index = outcome.get("index")
    return trace


def trace_to_text(g: AccessibilityGraph, trace: Trace) -> str:
    """Line-oriented log: header, initial profile, one line per move, outcome."""
    names = lambda s: " ".join(f"{a}={q}" for a, q in g.profile_names(s).items())  # noqa: E731
    lines = [f"# mode={trace.mode.value} scheduler={trace.scheduler}", f"0 init {names(trace.initial)}"]
    for i, st in enumerate(trace.steps, start=1):
        m = st.move
        lines.append(
            f"{i} {g.agent_names[m.agent]} {g.resource_names[m.source]}->{g.resource_names[m.target]}"
        )
    tail = f"outcome {trace.outcome.value}"
    if trace.revisit_index is not None:
        tail += f" {trace.revisit_index}"
    lines.append(tail)
    return "\n".join(lines) + "\n"
