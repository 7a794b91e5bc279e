"""
Tests for the neighbour oracle, frequency estimation and the testers.

Sampling runs are seeded, so every verdict below is deterministic; the
sample caps keep them fast without changing which branch is taken.
"""

import itertools
import logging
import math

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from zigzag_proptest.errors import BudgetExceeded, CapExceeded, PreconditionError
from zigzag_proptest.gsf import enumerate_deg2_graphs
from zigzag_proptest.structures import ball_isomorphic, classify, new_registry
from zigzag_proptest.testers import (
    GraphOracle,
    brute_distance,
    estimate_frequencies,
    explore_ball,
    explore_graph,
    framework_tester,
    freeness_parameters,
    freeness_tester,
    graph_ball,
    is_tau_free,
    is_tau_regular,
    maxcl,
    regularity_M,
    regularity_tester,
    rejection_rate,
    run_trials,
    sample_size,
)


@st.composite
def bounded_graphs(draw, d=3, max_n=9):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    graph = nx.empty_graph(n)
    for u, v in chosen:
        if graph.degree(u) < d and graph.degree(v) < d:
            graph.add_edge(u, v)
    return graph


def disjoint_edges(m: int) -> nx.Graph:
    return nx.Graph([(2 * k, 2 * k + 1) for k in range(m)])


def k4_copies(m: int, extra: int = 0) -> nx.Graph:
    graph = nx.disjoint_union_all([nx.complete_graph(4)] * m)
    graph.add_nodes_from(range(4 * m, 4 * m + extra))
    return graph


# =============================================================================
# PROPERTY: The oracle answers sorted neighbour slots and counts queries
# =============================================================================


def test_oracle_answers_sorted_slots():
    o = GraphOracle(nx.path_graph(3), 2)
    assert o.query(1, 0) == 0
    assert o.query(1, 1) == 2
    assert o.query(0, 1) is None
    assert o.queries == 3


def test_oracle_rejects_degree_above_bound():
    with pytest.raises(PreconditionError):
        GraphOracle(nx.star_graph(3), 2)


def test_oracle_rejects_queries_outside_slots():
    o = GraphOracle(nx.path_graph(3), 2)
    with pytest.raises(PreconditionError):
        o.query(0, 2)


def test_sampling_is_keyed_by_seed_and_index():
    a = GraphOracle(nx.cycle_graph(50), 2, seed=7)
    b = GraphOracle(nx.cycle_graph(50), 2, seed=7)
    assert [a.sample_vertex(k) for k in range(20)] == [b.sample_vertex(k) for k in range(20)]
    assert a.queries == 0


@given(graph=bounded_graphs(), r=st.integers(min_value=0, max_value=2), data=st.data())
@settings(max_examples=50)
def test_explored_ball_is_the_true_ball(graph, r, data):
    """Property: BFS through the oracle sees the same r-ball as the structure."""
    v = data.draw(st.integers(min_value=0, max_value=graph.number_of_nodes() - 1))
    explored = explore_ball(GraphOracle(graph, 3), v, r)
    direct = graph_ball(graph, v, r)
    assert explored.distances == direct.distances
    assert ball_isomorphic(explored, direct)


def test_explore_graph_recovers_edges():
    graph = nx.petersen_graph()
    o = GraphOracle(graph, 3)
    assert set(map(frozenset, explore_graph(o).edges())) == set(map(frozenset, graph.edges()))
    assert o.queries == 10 * 3


# =============================================================================
# PROPERTY: Sample sizes and frequency estimates
# =============================================================================


def test_sample_size_values():
    assert sample_size(4, 0.1) == 6055
    assert sample_size(1, 1.0) == 4


@pytest.mark.parametrize("t, lam", [(0, 0.5), (2, 0.0), (2, 1.5)])
def test_sample_size_rejects_bad_arguments(t, lam):
    with pytest.raises(PreconditionError):
        sample_size(t, lam)


def test_vertex_transitive_graph_has_frequency_one():
    reg = new_registry(1)
    assert estimate_frequencies(GraphOracle(nx.cycle_graph(8), 2), 1, 50, reg) == [1.0]


def test_path_endpoint_frequency():
    """Property: frequencies converge to the type distribution."""
    graph = nx.path_graph(3)
    reg = new_registry(1)
    endpoint = classify(reg, graph_ball(graph, 0, 1))
    freqs = estimate_frequencies(GraphOracle(graph, 2, seed=3), 1, 3000, reg)
    assert freqs[endpoint] == pytest.approx(2 / 3, abs=0.05)
    assert sum(freqs) == pytest.approx(1.0)


def test_frequencies_do_not_depend_on_thread_count():
    graph = nx.disjoint_union(nx.cycle_graph(6), nx.path_graph(5))
    single = estimate_frequencies(GraphOracle(graph, 2, seed=11), 1, 200, new_registry(1))
    pooled = estimate_frequencies(GraphOracle(graph, 2, seed=11), 1, 200, new_registry(1), threads=4)
    assert single == pooled


# =============================================================================
# PROPERTY: Framework tester branches
# =============================================================================


def test_membership_rejects_without_queries():
    o = GraphOracle(nx.cycle_graph(9), 2)
    verdict = framework_tester(o, lambda n: n % 3 == 0, 1, 0.5, [], lambda g: True)
    assert (verdict.accept, verdict.cause, verdict.queries) == (False, "M", 0)


def test_small_graphs_are_decided_exactly():
    o = GraphOracle(nx.cycle_graph(5), 2)
    verdict = framework_tester(o, lambda n: False, 10, 0.5, [], nx.is_bipartite)
    assert (verdict.accept, verdict.cause) == (False, "exact")
    assert verdict.queries == 10


def test_no_forbidden_types_accepts_immediately():
    o = GraphOracle(nx.cycle_graph(5), 2)
    verdict = framework_tester(o, lambda n: False, 1, 0.5, [], lambda g: False)
    assert verdict.accept
    assert verdict.queries == 0


def test_sample_cap_is_announced(caplog):
    caplog.set_level(logging.WARNING)
    tau = graph_ball(nx.path_graph(2), 0, 1)
    verdict = framework_tester(
        GraphOracle(nx.cycle_graph(30), 2), lambda n: False, 1, 0.01, [tau], lambda g: True, max_samples=25
    )
    assert verdict.accept
    assert verdict.samples == 25
    assert any("Capping" in record.message for record in caplog.records)


def test_query_count_is_bounded_by_ball_sizes():
    """Property: each sample explores at most 1 + d + d(d-1) vertices at radius 2."""
    d = 3
    tau = graph_ball(nx.path_graph(2), 0, 2)
    o = GraphOracle(nx.petersen_graph(), d)
    verdict = framework_tester(o, lambda n: False, 1, 0.5, [tau], lambda g: True, max_samples=40)
    assert verdict.accept
    assert verdict.queries <= verdict.samples * (1 + d + d * (d - 1)) * d


# =============================================================================
# PROPERTY: Freeness
# =============================================================================


def test_freeness_constants(degree_one_type):
    M, n0, lam, forbid = freeness_parameters(degree_one_type, 2, 0.1)
    assert forbid
    assert n0 == 80
    assert lam == pytest.approx(0.1 * 2 / (14 * (1 + 2**3)))
    assert not M(7)


def test_regular_type_has_trivial_constants():
    tau = graph_ball(nx.cycle_graph(10), 0, 1)
    M, n0, lam, forbid = freeness_parameters(tau, 2, 0.25)
    assert (n0, lam, forbid) == (1, 0.25, True)


def test_type_above_degree_bound_is_never_present():
    tau = graph_ball(nx.star_graph(3), 0, 1)
    verdict = freeness_tester(GraphOracle(nx.cycle_graph(12), 2), tau, 0.5)
    assert verdict.accept
    assert verdict.queries == 0


def test_cycle_is_free_of_degree_one_vertices(degree_one_type):
    verdict = freeness_tester(GraphOracle(nx.cycle_graph(20), 2), degree_one_type, 0.5, max_samples=300)
    assert verdict.accept
    assert verdict.cause is None


def test_matching_is_rejected_in_the_exact_phase(degree_one_type):
    verdict = freeness_tester(GraphOracle(disjoint_edges(10), 2), degree_one_type, 0.1)
    assert (verdict.accept, verdict.cause) == (False, "exact")
    assert verdict.queries == 40


def test_isolated_type_at_degree_one_rejects_odd_orders(isolated_type):
    odd = nx.disjoint_union(nx.path_graph(2), nx.empty_graph(1))
    verdict = freeness_tester(GraphOracle(odd, 1), isolated_type, 0.5)
    assert (verdict.accept, verdict.cause, verdict.queries) == (False, "M", 0)

    even = disjoint_edges(2)
    assert freeness_tester(GraphOracle(even, 1), isolated_type, 0.5, max_samples=200).accept


def test_forbidden_ball_stops_sampling_early():
    tau = graph_ball(nx.cycle_graph(10), 0, 1)
    verdict = freeness_tester(GraphOracle(nx.cycle_graph(30), 2), tau, 0.5)
    assert (verdict.accept, verdict.cause) == (False, "forbidden")
    assert verdict.samples == 1


@given(graph=bounded_graphs(d=2, max_n=8))
@settings(max_examples=40)
def test_exact_phase_agrees_with_freeness(graph):
    """Property: below n0 the verdict is exactly tau-freeness."""
    tau = graph_ball(nx.path_graph(2), 0, 1)
    verdict = freeness_tester(GraphOracle(graph, 2), tau, 0.1)
    assert verdict.accept == is_tau_free(graph, tau)


# =============================================================================
# PROPERTY: Regularity
# =============================================================================


def test_maxcl_counts_maximal_cliques_through_the_center():
    middle = graph_ball(nx.path_graph(3), 1, 1)
    assert maxcl(middle, 2) == 2
    assert maxcl(middle, 3) == 0

    bowtie = nx.Graph([(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])
    assert maxcl(graph_ball(bowtie, 0, 1), 3) == 2


def test_maxcl_needs_radius_one():
    with pytest.raises(PreconditionError):
        maxcl(graph_ball(nx.path_graph(3), 1, 2), 2)


def test_regularity_membership(k4_type, degree_one_type):
    M = regularity_M(k4_type, 3)
    assert [n for n in range(1, 13) if not M(n)] == [4, 8, 12]
    assert regularity_M(degree_one_type, 1)(5)
    assert not regularity_M(degree_one_type, 1)(6)


def test_k4_copies_are_regular(k4_type):
    verdict = regularity_tester(GraphOracle(k4_copies(2), 3), k4_type, 0.5)
    assert verdict.accept
    assert is_tau_regular(k4_copies(3), k4_type)


def test_wrong_order_is_rejected_by_membership(k4_type):
    verdict = regularity_tester(GraphOracle(k4_copies(2, extra=1), 3), k4_type, 0.5)
    assert (verdict.accept, verdict.cause) == (False, "M")


def test_regularity_needs_clique_neighbourhoods():
    fan = nx.Graph([(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)])
    with pytest.raises(PreconditionError):
        regularity_tester(GraphOracle(fan, 3), graph_ball(fan, 0, 1), 0.5)


def test_regularity_is_for_one_types():
    with pytest.raises(PreconditionError):
        regularity_tester(GraphOracle(nx.cycle_graph(6), 2), graph_ball(nx.cycle_graph(6), 0, 2), 0.5)


def test_sampled_regularity_rejects_other_types():
    tau = graph_ball(nx.cycle_graph(10), 0, 1)
    # d=2 gives n0 = 5120, so these orders reach the sampling phase
    verdict = regularity_tester(GraphOracle(nx.cycle_graph(6000), 2), tau, 1.0, max_samples=300)
    assert verdict.accept
    ends = disjoint_edges(2600)
    verdict = regularity_tester(GraphOracle(ends, 2), tau, 1.0, max_samples=50)
    assert (verdict.accept, verdict.cause) == (False, "forbidden")


# =============================================================================
# PROPERTY: Exact distance
# =============================================================================


def is_triangle(graph: nx.Graph) -> bool:
    return nx.is_isomorphic(graph, nx.cycle_graph(3))


def has_triangle(graph: nx.Graph) -> bool:
    return any(nx.triangles(graph).values())


def test_distance_by_flips():
    assert brute_distance(nx.path_graph(3), is_triangle, 2) == 1
    assert brute_distance(nx.empty_graph(3), is_triangle, 2) == 3
    assert brute_distance(nx.path_graph(3), lambda g: False, 2) == math.inf


def test_distance_respects_degree_bound():
    assert brute_distance(nx.path_graph(3), is_triangle, 1) == math.inf


def test_distance_over_degree_two_graphs():
    assert brute_distance(nx.path_graph(3), is_triangle, 2, mode="deg2") == 1
    assert brute_distance(nx.cycle_graph(4), nx.is_forest, 2, mode="deg2") == 1


def relabeling_distance(G: nx.Graph, H: nx.Graph) -> int:
    own = {tuple(sorted(e)) for e in G.edges()}
    best = math.inf
    for perm in itertools.permutations(range(G.number_of_nodes())):
        moved = {tuple(sorted((perm[u], perm[v]))) for u, v in H.edges()}
        best = min(best, len(own ^ moved))
    return best


@pytest.mark.parametrize("n", range(1, 7))
def test_component_search_matches_every_relabeling(n):
    """Property: cutting components into common paths finds the best relabeling."""
    graphs = list(enumerate_deg2_graphs(n))
    for G, H in itertools.product(graphs, repeat=2):
        exact = brute_distance(G, lambda g: nx.is_isomorphic(g, H), 2, mode="deg2")
        assert exact == relabeling_distance(G, H)


@pytest.mark.parametrize("n", [10, 11, 12])
def test_degree_two_distance_up_to_twelve_vertices(n):
    assert brute_distance(nx.empty_graph(n), lambda g: True, 2, mode="deg2") == 0
    assert brute_distance(nx.cycle_graph(n), nx.is_forest, 2, mode="deg2") == 1
    assert brute_distance(nx.path_graph(n), has_triangle, 2, mode="deg2") == 2

    two_pentagons = nx.disjoint_union(nx.cycle_graph(5), nx.cycle_graph(5))
    two_pentagons.add_nodes_from(range(10, n))
    # cut both pentagons, then join every piece into one path
    assert brute_distance(two_pentagons, nx.is_connected, 2, mode="deg2") == n - 7


def test_degree_two_distance_from_a_denser_graph():
    assert brute_distance(nx.star_graph(3), nx.is_connected, 2, mode="deg2") == 2
    with pytest.raises(CapExceeded):
        brute_distance(nx.complete_graph(7), lambda g: True, 2, mode="deg2")


def test_distance_limits():
    with pytest.raises(CapExceeded):
        brute_distance(nx.empty_graph(9), is_triangle, 2)
    with pytest.raises(CapExceeded):
        brute_distance(nx.empty_graph(13), lambda g: True, 2, mode="deg2")
    with pytest.raises(BudgetExceeded):
        brute_distance(nx.path_graph(3), is_triangle, 2, budget=1)
    with pytest.raises(PreconditionError):
        brute_distance(nx.path_graph(3), is_triangle, 2, mode="greedy")


# =============================================================================
# PROPERTY: Monte-Carlo harness
# =============================================================================


def test_rejection_rate_of_a_sound_tester(degree_one_type):
    tester = lambda o: freeness_tester(o, degree_one_type, 0.5, max_samples=30)  # noqa: E731
    factory = lambda seed: GraphOracle(nx.cycle_graph(20), 2, seed=seed)  # noqa: E731
    assert rejection_rate(tester, factory, range(5)) == 0.0


def test_trials_do_not_depend_on_thread_count():
    tau = graph_ball(nx.path_graph(2), 0, 1)
    graph = nx.disjoint_union(nx.cycle_graph(40), nx.path_graph(2))
    tester = lambda o: framework_tester(o, lambda n: False, 1, 0.5, [tau], lambda g: True)  # noqa: E731
    factory = lambda seed: GraphOracle(graph, 2, seed=seed)  # noqa: E731
    single = run_trials(tester, factory, range(6))
    pooled = run_trials(tester, factory, range(6), threads=3)
    assert [v.accept for v in single] == [v.accept for v in pooled]
    assert [v.samples for v in single] == [v.samples for v in pooled]


# =============================================================================
# What these tests teach:
#
# 1. Seeded sampling makes randomized verdicts reproducible test data
# 2. Each branch of the framework (M, exact, sampling) is hit on purpose
# 3. Exact oracles on tiny graphs pin down what the tester must decide
# =============================================================================
