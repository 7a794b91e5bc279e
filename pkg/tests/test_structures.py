"""
Property-based tests for structures, balls, types and profiles.

Rooted ball isomorphism is checked against networkx.is_isomorphic.
"""

import logging

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from zigzag_proptest.errors import DimensionMismatch, PreconditionError
from zigzag_proptest.models import Interval, Signature, Structure
from zigzag_proptest.structures import (
    ball_isomorphic,
    classify,
    degree,
    disjoint_copies,
    disjoint_union,
    edit_distance,
    gaifman,
    graph_structure,
    histogram,
    make_profile,
    max_degree,
    new_registry,
    obeys_profile,
    r_ball,
    root_profiles,
    sampling_distance,
    sampling_distance_r,
    structure_graph,
)


@st.composite
def small_graphs(draw, max_n=8, degree_cap=None):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for u, v in chosen:
        if degree_cap is None or (graph.degree(u) < degree_cap and graph.degree(v) < degree_cap):
            graph.add_edge(u, v)
    return graph


def rooted(ball) -> nx.Graph:
    graph = structure_graph(ball.structure)
    nx.set_node_attributes(graph, {v: v == ball.center for v in graph}, "root")
    return graph


def same_root(a, b) -> bool:
    return a["root"] == b["root"]


COLOURED = Signature.of(("R", 2), ("B", 2))


# =============================================================================
# PROPERTY: Gaifman graph and degree
# =============================================================================


def test_gaifman_ignores_self_tuples_and_direction():
    A = Structure(sig=COLOURED, n=3, tuples={"R": frozenset({(0, 1), (2, 2)}), "B": frozenset({(1, 0)})})
    graph = gaifman(A)
    assert sorted(graph.edges()) == [(0, 1)]
    assert degree(A, 0) == 2
    assert degree(A, 2) == 1
    assert max_degree(A) == 2


def test_structure_rejects_tuples_outside_universe():
    with pytest.raises(ValueError):
        Structure(sig=COLOURED, n=2, tuples={"R": frozenset({(0, 5)})})


# =============================================================================
# PROPERTY: Balls and rooted isomorphism
# =============================================================================


def test_ball_reindexes_center_to_zero():
    ball = r_ball(graph_structure(nx.path_graph(5)), 2, 1)
    assert ball.center == 0
    assert ball.distances == [0, 1, 1]
    assert ball.structure.n == 3


def test_ball_rejects_unknown_element():
    with pytest.raises(PreconditionError):
        r_ball(graph_structure(nx.path_graph(3)), 7, 1)


@given(graph=small_graphs(), r=st.integers(min_value=0, max_value=2), data=st.data())
@settings(max_examples=80)
def test_ball_isomorphism_matches_networkx(graph, r, data):
    """Property: rooted isomorphism agrees with networkx on graph balls."""
    A = graph_structure(graph)
    u = data.draw(st.integers(min_value=0, max_value=A.n - 1))
    v = data.draw(st.integers(min_value=0, max_value=A.n - 1))
    B1, B2 = r_ball(A, u, r), r_ball(A, v, r)
    expected = nx.is_isomorphic(rooted(B1), rooted(B2), node_match=same_root)
    assert ball_isomorphic(B1, B2) == expected


def test_direction_and_colour_matter():
    forward = Structure(sig=COLOURED, n=2, tuples={"R": frozenset({(0, 1)})})
    backward = Structure(sig=COLOURED, n=2, tuples={"R": frozenset({(1, 0)})})
    blue = Structure(sig=COLOURED, n=2, tuples={"B": frozenset({(0, 1)})})
    b_fwd, b_bwd, b_blue = (r_ball(S, 0, 1) for S in (forward, backward, blue))
    assert not ball_isomorphic(b_fwd, b_bwd)
    assert not ball_isomorphic(b_fwd, b_blue)
    assert ball_isomorphic(b_fwd, r_ball(backward, 1, 1))


def test_balls_of_different_radius_are_incomparable():
    A = graph_structure(nx.cycle_graph(5))
    with pytest.raises(DimensionMismatch):
        ball_isomorphic(r_ball(A, 0, 1), r_ball(A, 0, 2))


# =============================================================================
# PROPERTY: Registry and histograms
# =============================================================================


def test_vertex_transitive_graph_has_one_type():
    reg = new_registry(2)
    assert histogram(graph_structure(nx.cycle_graph(8)), 2, reg) == [8]


def test_path_types():
    reg = new_registry(1)
    counts = histogram(graph_structure(nx.path_graph(3)), 1, reg)
    assert sorted(counts) == [1, 2]


@given(graph=small_graphs(), r=st.integers(min_value=0, max_value=2))
@settings(max_examples=50)
def test_histogram_sums_to_universe(graph, r):
    """Property: every element lands in exactly one type."""
    A = graph_structure(graph)
    assert sum(histogram(A, r, new_registry(r))) == A.n


def test_zero_radius_has_a_single_type_on_graphs():
    reg = new_registry(0)
    assert histogram(graph_structure(nx.petersen_graph()), 0, reg) == [10]


def test_classify_is_stable():
    reg = new_registry(1)
    A = graph_structure(nx.star_graph(3))
    first = classify(reg, r_ball(A, 1, 1))
    again = classify(reg, r_ball(A, 2, 1))
    assert first == again
    assert len(reg) == 1


# =============================================================================
# PROPERTY: Distances
# =============================================================================


def test_sampling_distance_separates_hexagon_from_triangles():
    C6 = graph_structure(nx.cycle_graph(6))
    two_C3 = graph_structure(nx.disjoint_union(nx.cycle_graph(3), nx.cycle_graph(3)))
    assert sampling_distance_r(C6, two_C3, 0) == 0.0
    assert sampling_distance_r(C6, two_C3, 1) == pytest.approx(1.0)
    result = sampling_distance(C6, two_C3, 2)
    assert result.value == pytest.approx(0.5 + 0.25)
    assert result.tail_bound == pytest.approx(0.5)


@given(graph=small_graphs(max_n=6))
@settings(max_examples=30)
def test_sampling_distance_to_itself_is_zero(graph):
    A = graph_structure(graph)
    assert sampling_distance(A, A, 2).value == 0.0


def test_edit_distance_counts_symmetric_difference():
    A = graph_structure(nx.path_graph(4))
    B = graph_structure(nx.cycle_graph(4))
    # one undirected edge is two E-tuples
    assert edit_distance(A, B, 2) == pytest.approx(2 / 8)


def test_disjoint_union_offsets_second_operand():
    U = disjoint_union(graph_structure(nx.path_graph(2)), graph_structure(nx.path_graph(2)))
    assert U.n == 4
    assert U.rel("E") == frozenset({(0, 1), (1, 0), (2, 3), (3, 2)})


# =============================================================================
# PROPERTY: Profiles
# =============================================================================


@given(
    parts=st.lists(small_graphs(max_n=4), min_size=1, max_size=4),
    keep=st.lists(st.booleans(), min_size=4, max_size=4),
)
@settings(max_examples=40)
def test_zero_profiles_are_monotone(parts, keep):
    """Property: dropping components never breaks a 0-profile."""
    structures = [graph_structure(g) for g in parts]
    sig = structures[0].sig
    B = disjoint_copies(structures, sig)
    A = disjoint_copies([S for S, k in zip(structures, keep) if k] or structures[:1], sig)

    reg = new_registry(1)
    counts = histogram(B, 1, reg)
    rho = make_profile(reg, {idx: Interval(lo=0, hi=c) for idx, c in enumerate(counts)})
    assert rho.is_zero_profile
    assert obeys_profile(B, rho)
    assert obeys_profile(A, rho)


def test_profile_default_rejects_unseen_types():
    reg = new_registry(1)
    counts = histogram(graph_structure(nx.cycle_graph(5)), 1, reg)
    rho = make_profile(reg, {0: Interval(lo=0, hi=counts[0])})
    assert not obeys_profile(graph_structure(nx.path_graph(3)), rho)


def test_root_profiles_cap_the_root_type():
    reg = new_registry(1)
    star = graph_structure(nx.star_graph(2))
    types = [classify(reg, r_ball(star, a, 1)) for a in range(star.n)]
    (rho,) = root_profiles(reg, [(types[0], types)])
    assert str(rho.intervals[types[0]]) == "[0,1]"
    assert obeys_profile(star, rho)
    two_stars = disjoint_copies([star, star], star.sig)
    assert not obeys_profile(two_stars, rho)


def test_histogram_logs(caplog):
    caplog.set_level(logging.INFO)
    histogram(graph_structure(nx.cycle_graph(4)), 1, new_registry(1))
    assert any("Histogram r=1" in record.message for record in caplog.records)


# =============================================================================
# What these tests teach:
#
# 1. Rooted isomorphism is checked against an independent implementation
# 2. Types are discovered lazily and keep their index once registered
# 3. 0-profiles are monotone; that is what makes them forbiddable
# =============================================================================
