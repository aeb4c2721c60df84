import random
from fractions import Fraction as F

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from rsgame.analysis import (
    BudgetExceededError,
    MoveClass,
    PhiLex,
    PreconditionError,
    ProfileSpace,
    audit_digraph_phi_lex,
    audit_digraph_phi_majority,
    audit_phi_lex,
    audit_phi_majority,
    build_digraph,
    classify_move,
    enumerate_profiles,
    extremal_fraction_report,
    extremal_report_for_states,
    find_equilibria,
    fip_check,
    majority_share,
    minority_share,
    phi_lex,
    phi_majority,
    strictly_decreased,
)
from rsgame.bounds import lower_bound_L, upper_bound_U
from rsgame.core import AccessibilityGraph, Color, ResourceState, UtilitySpec, resource_state
from rsgame.dynamics import Mode, Move, Trace, apply, improving_moves, run
from rsgame.instances import (
    gen_cycle,
    gen_no_iae_binary_tree,
    gen_no_ibe,
    gen_random_bipartite,
    random_profile,
)

HALF = F(1, 2)


def small_board(seed):
    return gen_random_bipartite(seed, max_resources=4, max_agents=7, profile_budget=400)


def as_networkx(dg):
    nxg = nx.DiGraph()
    nxg.add_nodes_from(range(dg.node_count))
    nxg.add_edges_from((u, v) for u, _, v in dg.edges())
    return nxg


def test_profile_space_round_trip():
    g = gen_no_iae_binary_tree()
    space = ProfileSpace(g)
    assert space.size == 8
    seen = set()
    for i in range(space.size):
        s = space.decode(i)
        assert space.encode(s) == i
        seen.add(s)
    assert len(seen) == 8
    assert list(enumerate_profiles(g)) == [space.decode(i) for i in range(8)]
    with pytest.raises(BudgetExceededError):
        ProfileSpace(g, budget=7)


def test_neighbour_index_matches_apply():
    g = small_board(11)
    space = ProfileSpace(g)
    for i in range(space.size):
        s = space.decode(i)
        for a, qs in enumerate(g.access):
            for q in qs:
                if q != s[a]:
                    m = Move(a, s[a], q)
                    assert space.decode(space.neighbour(i, m)) == apply(s, m)


def test_no_ibe_has_no_blind_equilibrium():
    g = gen_no_ibe(3)
    assert find_equilibria(g, UtilitySpec(HALF), Mode.IMPACT_BLIND) == []
    result = fip_check(g, UtilitySpec(HALF), Mode.IMPACT_BLIND)
    assert not result.holds and not result
    assert len(result.cycle) == 2
    assert {m.agent for m in result.cycle} == {g.agent_id("a1")}


def test_tree_has_two_aware_equilibria_at_one_half():
    g = gen_no_iae_binary_tree()
    found = find_equilibria(g, UtilitySpec(HALF), Mode.IMPACT_AWARE)
    named = [tuple(g.profile_names(s)[a] for a in ("a1", "a2", "a3")) for s in found]
    assert sorted(named) == [("q1", "q3", "q4"), ("q2", "q3", "q4")]
    assert fip_check(g, UtilitySpec(HALF), Mode.IMPACT_AWARE).holds


TABLE_CYCLE = [("a2", "q1"), ("a1", "q2"), ("a2", "q3"), ("a3", "q2"), ("a1", "q1"), ("a3", "q4")]


@pytest.mark.parametrize("lam", [F(11, 20), F(3, 5), F(4, 5)])
def test_tree_table_cycle_is_in_digraph(lam):
    g = gen_no_iae_binary_tree()
    dg = build_digraph(g, UtilitySpec(lam), Mode.IMPACT_AWARE)
    edge_set = {(u, v) for u, _, v in dg.edges()}
    s = g.profile_from_names({**g.profile_names(g.default_profile()), "a1": "q1", "a2": "q3", "a3": "q4"})
    start = s
    for agent, target in TABLE_CYCLE:
        a = g.agent_id(agent)
        t = apply(s, Move(a, s[a], g.resource_id(target)))
        assert (dg.space.encode(s), dg.space.encode(t)) in edge_set
        s = t
    assert s == start
    assert dg.sinks() == []


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), lam=st.sampled_from([F(1, 5), F(2, 5), HALF, F(3, 5), F(4, 5)]))
def test_sinks_match_equilibria_and_networkx(seed, lam):
    g = small_board(seed)
    spec = UtilitySpec(lam)
    for mode in Mode:
        dg = build_digraph(g, spec, mode)
        assert [dg.profile(u) for u in dg.sinks()] == find_equilibria(g, spec, mode)
        result = fip_check(g, spec, mode)
        assert result.holds == nx.is_directed_acyclic_graph(as_networkx(dg))
        if not result.holds:
            # the witness is a closed walk of improving moves
            s = result.cycle_profiles[0]
            for m in result.cycle:
                assert m in improving_moves(g, s, spec, mode)
                s = apply(s, m)
            assert s == result.cycle_profiles[0]


def test_parallel_digraph_matches_serial():
    g = gen_cycle(13, coloring=7)  # 2**13 profiles, above the parallel cut-off
    spec = UtilitySpec(F(3, 5))
    serial = build_digraph(g, spec, Mode.IMPACT_AWARE)
    parallel = build_digraph(g, spec, Mode.IMPACT_AWARE, jobs=2)
    assert serial.successors == parallel.successors


def test_dot_output():
    g = gen_no_ibe(3)
    dot = build_digraph(g, UtilitySpec(HALF), Mode.IMPACT_BLIND).to_dot()
    assert dot.startswith("digraph improvement_ib {")
    assert dot.count(" -> p") == 2


def test_phi_lex_components():
    g = gen_no_ibe(3)
    spec = UtilitySpec.linear(F(3, 5))
    value = phi_lex(g, g.default_profile(), spec)
    # q1 holds a1, b1, r1_1 (2 red, 1 blue); q2 holds b2, r2_1
    assert value.empty_count == 0
    assert value.mono_counts == (0, 0, 0)
    assert value.max_util_count == 1  # only q1 holds delta - 1 = 2 agents of one colour
    assert PhiLex(1, (0,), 0, F(0)) > PhiLex(0, (5,), 9, F(9))
    with pytest.raises(Exception, match="not numerically evaluable"):
        phi_lex(g, g.default_profile(), UtilitySpec(HALF))


def test_phi_lex_preconditions():
    g = gen_no_ibe(3)
    trace = run(g, g.default_profile(), UtilitySpec.linear(HALF), Mode.IMPACT_BLIND)
    with pytest.raises(PreconditionError):
        audit_phi_lex(g, trace, UtilitySpec.linear(HALF))  # below L(3) = 3/5
    with pytest.raises(PreconditionError):
        audit_phi_lex(g, trace, UtilitySpec(F(3, 5)))  # abstract p
    aware = Trace.from_moves(trace.initial, [], Mode.IMPACT_AWARE)
    with pytest.raises(PreconditionError):
        audit_phi_lex(g, aware, UtilitySpec.linear(F(3, 5)))


def test_phi_lex_audit_flags_non_improving_replay():
    g = gen_no_ibe(3)
    s = g.default_profile()
    spec = UtilitySpec.linear(F(3, 5))
    m = Move(0, 0, 1)
    back = Trace.from_moves(s, [m, Move(0, 1, 0)], Mode.IMPACT_BLIND)
    violation = audit_phi_lex(g, back, spec)
    assert violation is not None and violation.step in (0, 1)
    assert violation.to_json()["reason"]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), slope=st.sampled_from([F(1), F(1, 3), F(5, 2)]))
def test_phi_lex_increases_on_every_blind_edge(seed, slope):
    g = small_board(seed)
    delta = g.max_resource_degree
    if delta < 3:
        return  # L(2) = 0 is not a valid peak
    for lam in (lower_bound_L(delta), (lower_bound_L(delta) + 1) / 2):
        dg = build_digraph(g, UtilitySpec.linear(lam, slope), Mode.IMPACT_BLIND)
        assert audit_digraph_phi_lex(dg) is None


def test_classify_move_examples():
    g = AccessibilityGraph.build(
        ["q0", "q1", "q2"],
        [("r0", Color.RED), ("r1", Color.RED), ("r2", Color.RED), ("b0", Color.BLUE), ("b1", Color.BLUE)],
        [("r0", "q0"), ("r0", "q1"), ("r0", "q2"), ("r1", "q0"), ("r2", "q1"), ("b0", "q0"), ("b1", "q1")],
    )
    # q0: r0, r1, b0 (red 2/3); q1: r2, b1 (red 1/2); q2 empty
    s = (0, 0, 1, 0, 1)
    assert classify_move(g, s, Move(0, 0, 1)) is MoveClass.MAJORITY_TO_MAJORITY
    assert classify_move(g, s, Move(0, 0, 2)) is MoveClass.TIE_INVOLVED
    # blue b0 is a minority at q0
    g2 = AccessibilityGraph.build(
        ["q0", "q1"],
        [("b0", Color.BLUE), ("r0", Color.RED), ("r1", Color.RED), ("r2", Color.RED)],
        [("b0", "q0"), ("b0", "q1"), ("r0", "q0"), ("r1", "q0"), ("r2", "q1")],
    )
    s2 = (0, 0, 0, 1)
    assert classify_move(g2, s2, Move(0, 0, 1)) is MoveClass.MINORITY_TO_MINORITY
    assert phi_majority(g2, s2) == 2 + 1
    assert phi_majority(g2, apply(s2, Move(0, 0, 1))) == 2 + 1


def two_resource_red_mover(source, target):
    """Board with one red mover at q0 and pinned agents realising the given states."""
    agents, edges = [("m", Color.RED)], [("m", "q0"), ("m", "q1")]
    for q, (red, blue) in enumerate([(source[0] - 1, source[1]), target]):
        for i in range(red):
            agents.append((f"r{q}_{i}", Color.RED))
            edges.append((f"r{q}_{i}", f"q{q}"))
        for i in range(blue):
            agents.append((f"b{q}_{i}", Color.BLUE))
            edges.append((f"b{q}_{i}", f"q{q}"))
    g = AccessibilityGraph.build(["q0", "q1"], agents, edges)
    return g, g.default_profile()


@pytest.mark.parametrize(
    "source,target,expected",
    [
        ((3, 1), (70, 30), MoveClass.MAJORITY_TO_MAJORITY),
        ((2, 3), (3, 7), MoveClass.MINORITY_TO_MINORITY),
        ((3, 1), (1, 3), MoveClass.MAJORITY_TO_MINORITY),
        ((1, 2), (2, 1), MoveClass.MINORITY_TO_MAJORITY),
        ((2, 2), (1, 3), MoveClass.TIE_INVOLVED),
        ((1, 0), (1, 3), MoveClass.TIE_INVOLVED),
    ],
)
def test_classify_red_mover(source, target, expected):
    g, s = two_resource_red_mover(source, target)
    assert classify_move(g, s, Move(0, 0, 1)) is expected


def test_phi_majority_values():
    g, s = two_resource_red_mover((3, 1), (70, 30))
    assert phi_majority(g, s) == 73
    assert phi_majority(g, apply(s, Move(0, 0, 1))) == 2 + 71
    g, s = two_resource_red_mover((3, 1), (1, 3))
    assert phi_majority(g, apply(s, Move(0, 0, 1))) == phi_majority(g, s) - 1
    assert phi_majority(AccessibilityGraph.build(["q"], [("a", Color.RED)], [("a", "q")]), (0,)) == 1


def test_phi_majority_preconditions():
    g = gen_no_ibe(3)
    trace = Trace.from_moves(g.default_profile(), [], Mode.IMPACT_AWARE)
    assert audit_phi_majority(g, trace, UtilitySpec(F(2, 5))) is None
    with pytest.raises(PreconditionError):
        audit_phi_majority(g, trace, UtilitySpec(HALF))
    with pytest.raises(PreconditionError):
        audit_phi_majority(g, Trace.from_moves(g.default_profile(), [], Mode.IMPACT_BLIND), UtilitySpec(F(1, 5)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_majority_potential_on_every_aware_edge(seed):
    g = small_board(seed)
    delta = g.max_resource_degree
    if delta < 3:
        return  # U(2) = 1 is not a valid peak
    for lam in (upper_bound_U(delta), upper_bound_U(delta) / 2):
        dg = build_digraph(g, UtilitySpec(lam), Mode.IMPACT_AWARE)
        assert audit_digraph_phi_majority(dg) is None


def test_majority_audit_on_runs():
    rng = random.Random(3)
    for seed in range(30):
        g = small_board(seed)
        if g.max_resource_degree < 3:
            continue
        spec = UtilitySpec(upper_bound_U(g.max_resource_degree))
        trace = run(g, random_profile(g, rng), spec, Mode.IMPACT_AWARE, max_steps=200)
        assert audit_phi_majority(g, trace, spec) is None


def test_shares():
    assert minority_share(ResourceState(3, 7)) == F(3, 10)
    assert minority_share(ResourceState(1, 1)) is None
    assert minority_share(ResourceState(0, 4)) is None
    assert majority_share(ResourceState(1, 1)) == HALF
    assert majority_share(ResourceState(0, 4)) is None
    assert majority_share(ResourceState(0, 0)) is None


def test_extremal_examples():
    # a red mover leaving (3, 1) for (70, 30) lifts the largest minority share to 1/3
    report = extremal_report_for_states(ResourceState(3, 1), ResourceState(70, 30), Color.RED)
    assert report.max_minority_before == F(3, 10)
    assert report.max_minority_after == F(1, 3)
    report = extremal_report_for_states(ResourceState(2, 3), ResourceState(3, 7), Color.RED)
    assert report.max_majority_before == F(7, 10)
    assert report.max_majority_after == F(3, 4)


def test_extremal_report_on_board_matches_states():
    g = gen_no_ibe(4)
    s = g.default_profile()
    m = Move(0, 0, 1)
    t = apply(s, m)
    direct = extremal_fraction_report(g, s, t, 0, 1)
    assert direct == extremal_report_for_states(resource_state(g, s, 0), resource_state(g, s, 1), Color.RED)


def test_strictly_decreased():
    assert strictly_decreased(F(1, 3), F(1, 4))
    assert strictly_decreased(F(1, 3), None)
    assert not strictly_decreased(F(1, 3), F(1, 3))
    assert not strictly_decreased(None, F(1, 3))
