"""Counterexample families, random boards, and the JSON instance format.

Instance files are JSON; every rational is a ``"p/q"`` string::

    {
      "resources": ["q1", "q2"],
      "agents": [["a1", "red"], ["b1", "blue"]],
      "edges": [["a1", "q1"], ["a1", "q2"], ["b1", "q1"]],
      "lambda": "1/2",
      "p_shape": {"linear": "1/1"},          # or "abstract"
      "initial": {"a1": "q1", "b1": "q1"}    # optional
    }
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Optional, Sequence

from .core import (
    AccessibilityGraph,
    Color,
    GameError,
    StrategyProfile,
    UtilitySpec,
    as_rational,
    format_rational,
)

R, B = Color.RED, Color.BLUE


class InstanceFormatError(GameError):
    pass


def _graph(resources, agents, edges) -> AccessibilityGraph:
    return AccessibilityGraph.build(resources, agents, edges)


def gen_no_ibe(d: int) -> AccessibilityGraph:
    """Two hubs of degree ``d`` and a red agent ``a1`` that can use both.

    Each hub also serves one blue and ``d - 2`` red agents bound to it, so a1
    always sits at share (d-1)/d and sees (d-2)/(d-1) at the other hub.
    """
    if d < 3:
        raise GameError(f"no-IBE family needs d >= 3, got {d}")
    resources = ["q1", "q2"]
    agents = [("a1", R)]
    edges = [("a1", "q1"), ("a1", "q2")]
    for hub in (1, 2):
        agents.append((f"b{hub}", B))
        edges.append((f"b{hub}", f"q{hub}"))
        for j in range(1, d - 1):
            name = f"r{hub}_{j}"
            agents.append((name, R))
            edges.append((name, f"q{hub}"))
    return _graph(resources, agents, edges)


def gen_no_iae_binary_tree() -> AccessibilityGraph:
    """13-vertex tree without an impact-aware equilibrium once lambda >= 1/2.

    a1 (red) chooses q1/q2, a2 (blue) q1/q3, a3 (blue) q2/q4; b1, b2 are blue
    and pinned to q1, q2; two red agents are pinned to each of q3 and q4.
    """
    resources = ["q1", "q2", "q3", "q4"]
    agents = [
        ("a1", R), ("a2", B), ("a3", B),
        ("b1", B), ("b2", B),
        ("r1", R), ("r2", R), ("r3", R), ("r4", R),
    ]
    edges = [
        ("a1", "q1"), ("a1", "q2"),
        ("a2", "q1"), ("a2", "q3"),
        ("a3", "q2"), ("a3", "q4"),
        ("b1", "q1"), ("b2", "q2"),
        ("r1", "q3"), ("r2", "q3"),
        ("r3", "q4"), ("r4", "q4"),
    ]
    return _graph(resources, agents, edges)


def gen_no_iae_chaser(d: int) -> AccessibilityGraph:
    """Red a1 flees blue a2, which follows it; ``d - 2`` blue agents pinned per hub."""
    if d < 4:
        raise GameError(f"chaser family needs d >= 4, got {d}")
    resources = ["q1", "q2"]
    agents = [("a1", R), ("a2", B)]
    edges = [("a1", "q1"), ("a1", "q2"), ("a2", "q1"), ("a2", "q2")]
    for hub in (1, 2):
        for j in range(1, d - 1):
            name = f"b{hub}_{j}"
            agents.append((name, B))
            edges.append((name, f"q{hub}"))
    return _graph(resources, agents, edges)


def gen_cycle(m: int, coloring=None) -> AccessibilityGraph:
    """Cycle alternating ``m`` resources and ``m`` agents.

    Agent ``a{i}`` reaches ``q{i}`` and ``q{i+1 mod m}``. ``coloring`` is an
    explicit sequence of colours or an int seed for coin flips (default: all red).
    """
    if m < 2:
        raise GameError(f"cycle needs m >= 2, got {m}")
    if coloring is None:
        colors = [R] * m
    elif isinstance(coloring, int):
        rng = random.Random(coloring)
        colors = [rng.choice((R, B)) for _ in range(m)]
    else:
        colors = [Color.parse(c) if isinstance(c, str) else c for c in coloring]
        if len(colors) != m:
            raise GameError(f"coloring has {len(colors)} entries for {m} agents")
    resources = [f"q{i}" for i in range(m)]
    agents = [(f"a{i}", colors[i]) for i in range(m)]
    edges = [(f"a{i}", f"q{j}") for i in range(m) for j in (i, (i + 1) % m)]
    return _graph(resources, agents, edges)


def gen_random_binary_tree(
    seed: int, max_resources: int = 5, max_agents: int = 8, red_fraction: float = 0.5
) -> AccessibilityGraph:
    """Random tree over alternating agent/resource vertices, all degrees <= 3.

    Grown from a root resource by attaching each new vertex to a uniformly
    chosen vertex of the other side that still has spare degree.
    """
    if max_resources < 1 or max_agents < 1:
        raise GameError("random binary tree limits must be at least 1")
    rng = random.Random(seed)
    k_target = rng.randint(1, max_resources)
    n_target = rng.randint(1, max_agents)
    res_deg = [0]
    agent_deg: list[int] = []
    agent_color: list[Color] = []
    edges: list[tuple[int, int]] = []  # (agent, resource)
    while len(res_deg) < k_target or len(agent_deg) < n_target:
        options = []
        if len(agent_deg) < n_target and any(d < 3 for d in res_deg):
            options.append("agent")
        if len(res_deg) < k_target and any(d < 3 for d in agent_deg):
            options.append("resource")
        if not options:
            break
        if rng.choice(options) == "agent":
            q = rng.choice([i for i, d in enumerate(res_deg) if d < 3])
            agent_deg.append(1)
            agent_color.append(R if rng.random() < red_fraction else B)
            res_deg[q] += 1
            edges.append((len(agent_deg) - 1, q))
        else:
            a = rng.choice([i for i, d in enumerate(agent_deg) if d < 3])
            res_deg.append(1)
            agent_deg[a] += 1
            edges.append((a, len(res_deg) - 1))
    if not agent_deg:
        # a lone resource: give it one agent so every board has a player
        agent_deg.append(1)
        agent_color.append(R if rng.random() < red_fraction else B)
        edges.append((0, 0))
    resources = [f"q{i}" for i in range(len(res_deg))]
    agents = [(f"a{i}", agent_color[i]) for i in range(len(agent_deg))]
    return _graph(resources, agents, [(f"a{a}", f"q{q}") for a, q in edges])


def gen_random_bipartite(
    seed: int,
    max_resources: int = 5,
    max_agents: int = 9,
    max_resource_degree: int = 5,
    max_agent_degree: int = 3,
    red_fraction: float = 0.5,
    profile_budget: Optional[int] = None,
) -> AccessibilityGraph:
    """Bounded-degree random board (not necessarily connected or acyclic).

    Agents are added one at a time with a random access set drawn from the
    resources that still have spare degree. With ``profile_budget`` set, an
    agent's degree is trimmed so the profile count stays within the budget.
    """
    rng = random.Random(seed)
    k = rng.randint(1, max_resources)
    n = rng.randint(1, max_agents)
    res_deg = [0] * k
    count = 1
    agents = []
    edges = []
    for a in range(n):
        open_q = [q for q in range(k) if res_deg[q] < max_resource_degree]
        if not open_q:
            break
        want = rng.randint(1, min(max_agent_degree, len(open_q)))
        if profile_budget is not None:
            while want > 1 and count * want > profile_budget:
                want -= 1
        chosen = sorted(rng.sample(open_q, want))
        count *= want
        for q in chosen:
            res_deg[q] += 1
            edges.append((f"a{a}", f"q{q}"))
        agents.append((f"a{a}", R if rng.random() < red_fraction else B))
    return _graph([f"q{q}" for q in range(k)], agents, edges)


def random_profile(g: AccessibilityGraph, rng: random.Random) -> StrategyProfile:
    return tuple(rng.choice(qs) for qs in g.access)


# -- file I/O ---------------------------------------------------------------


def _shape_to_json(spec: UtilitySpec):
    return "abstract" if spec.slope is None else {"linear": format_rational(spec.slope)}


def instance_to_json(
    g: AccessibilityGraph, spec: UtilitySpec, initial: Optional[Sequence[int]] = None
) -> dict:
    data = {
        "resources": list(g.resource_names),
        "agents": [[name, c.value] for name, c in zip(g.agent_names, g.colors)],
        "edges": [[g.agent_names[a], g.resource_names[q]] for a, q in g.edges],
        "lambda": format_rational(spec.lam),
        "p_shape": _shape_to_json(spec),
    }
    if initial is not None:
        data["initial"] = g.profile_names(g.check_profile(initial))
    return data


def dumps(g: AccessibilityGraph, spec: UtilitySpec, initial: Optional[Sequence[int]] = None) -> str:
    return json.dumps(instance_to_json(g, spec, initial), indent=2) + "\n"


def save(path, g: AccessibilityGraph, spec: UtilitySpec, initial: Optional[Sequence[int]] = None) -> None:
    Path(path).write_text(dumps(g, spec, initial))


def _pair(item, where: str) -> tuple[str, str]:
    if not (isinstance(item, list) and len(item) == 2 and all(isinstance(x, str) for x in item)):
        raise InstanceFormatError(f"{where}: expected a [name, name] pair, got {item!r}")
    return item[0], item[1]


def _rational(text, where: str):
    if not isinstance(text, str):
        raise InstanceFormatError(f"{where}: rationals must be 'p/q' strings, got {text!r}")
    try:
        return as_rational(text)
    except GameError as exc:
        raise InstanceFormatError(f"{where}: {exc}") from None


def instance_from_json(data) -> tuple[AccessibilityGraph, UtilitySpec, Optional[StrategyProfile]]:
    if not isinstance(data, dict):
        raise InstanceFormatError("top level must be a JSON object")
    for key in ("resources", "agents", "edges", "lambda", "p_shape"):
        if key not in data:
            raise InstanceFormatError(f"missing field {key!r}")
    resources = data["resources"]
    if not (isinstance(resources, list) and all(isinstance(x, str) for x in resources)):
        raise InstanceFormatError("resources: expected a list of names")
    agents = []
    for i, item in enumerate(data["agents"]):
        name, color = _pair(item, f"agents[{i}]")
        try:
            agents.append((name, Color.parse(color)))
        except GameError as exc:
            raise InstanceFormatError(f"agents[{i}]: {exc}") from None
    edges = [_pair(item, f"edges[{i}]") for i, item in enumerate(data["edges"])]
    known_agents = {name for name, _ in agents}
    for i, (a, q) in enumerate(edges):
        if a not in known_agents:
            raise InstanceFormatError(f"edges[{i}]: dangling agent name {a!r}")
        if q not in resources:
            raise InstanceFormatError(f"edges[{i}]: dangling resource name {q!r}")
    lam = _rational(data["lambda"], "lambda")
    if not 0 < lam < 1:
        raise InstanceFormatError(f"lambda: {data['lambda']} is not in (0, 1)")
    shape = data["p_shape"]
    if shape == "abstract":
        slope = None
    elif isinstance(shape, dict) and set(shape) == {"linear"}:
        slope = _rational(shape["linear"], "p_shape.linear")
    else:
        raise InstanceFormatError(f"p_shape: expected 'abstract' or {{'linear': 'p/q'}}, got {shape!r}")
    try:
        g = AccessibilityGraph.build(resources, agents, edges)
        spec = UtilitySpec(lam, slope)
    except GameError as exc:
        raise InstanceFormatError(str(exc)) from None
    initial = None
    if data.get("initial") is not None:
        try:
            initial = g.profile_from_names(data["initial"])
        except GameError as exc:
            raise InstanceFormatError(f"initial: {exc}") from None
    return g, spec, initial


def loads(text: str) -> tuple[AccessibilityGraph, UtilitySpec, Optional[StrategyProfile]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return instance_from_json(data)


def load(path) -> tuple[AccessibilityGraph, UtilitySpec, Optional[StrategyProfile]]:
    try:
        return loads(Path(path).read_text())
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None
