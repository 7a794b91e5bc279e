"""
Property-based tests for rotation maps, spectra and products.

Reference values come from numpy.linalg.eigvalsh and exhaustive subsets.
"""

import logging

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zigzag_proptest.errors import DimensionMismatch, InvalidRotmap, PreconditionError
from zigzag_proptest.graphcore import (
    cheeger_check,
    complete_rotmap,
    component_lambdas,
    connectivity_flags,
    cycle_rotmap,
    disjoint_rotmaps,
    expansion_bound_g,
    iterated_family,
    normalized_adjacency,
    random_rotmap,
    rotmap_from_graph,
    spectrum,
    square,
    validate_rotmap,
    zigzag,
)
from zigzag_proptest.models import RotMapGraph


@st.composite
def rotmaps(draw, max_n=12, max_D=3):
    n = draw(st.integers(min_value=1, max_value=max_n))
    D = draw(st.integers(min_value=1, max_value=max_D))
    seed = draw(st.integers(min_value=0, max_value=10_000))
    return random_rotmap(n, D, seed)


def single_loop() -> RotMapGraph:
    return RotMapGraph(n=1, D=1, targets=[0])


# =============================================================================
# PROPERTY: Validation pinpoints the first broken slot
# =============================================================================


def test_cycle_rotmap_is_valid():
    """Property: the canonical C4 map is total and self-inverse."""
    assert validate_rotmap(cycle_rotmap(4)).ok


def test_broken_involution_is_reported_at_first_slot():
    R = RotMapGraph.from_map(3, 1, {(0, 0): (1, 0), (1, 0): (2, 0), (2, 0): (2, 0)})
    report = validate_rotmap(R)
    assert not report.ok
    assert report.witness == {"v": 0, "i": 0}


def test_single_fixed_point_is_valid():
    assert validate_rotmap(single_loop()).ok


def test_missing_entry_is_a_violation_not_an_exception():
    R = RotMapGraph.from_map(2, 1, {(0, 0): (1, 0)})
    report = validate_rotmap(R)
    assert not report.ok
    assert report.witness == {"v": 0, "i": 0}


@given(R=rotmaps())
@settings(max_examples=100)
def test_random_rotmaps_are_valid(R):
    """Property: the generator only produces self-inverse maps."""
    assert validate_rotmap(R).ok


# =============================================================================
# PROPERTY: Normalized adjacency and spectra
# =============================================================================


def test_c4_adjacency():
    M = normalized_adjacency(cycle_rotmap(4))
    for v in range(4):
        assert M[v][(v + 1) % 4] == pytest.approx(0.5)
        assert M[v][(v - 1) % 4] == pytest.approx(0.5)
        assert M[v][(v + 2) % 4] == 0.0


def test_k4_adjacency():
    M = normalized_adjacency(complete_rotmap(4))
    expected = (np.ones((4, 4)) - np.eye(4)) / 3
    assert np.allclose(M, expected)


def test_adjacency_of_invalid_map_raises():
    R = RotMapGraph.from_map(2, 1, {(0, 0): (1, 0)})
    with pytest.raises(InvalidRotmap):
        normalized_adjacency(R)


@given(R=rotmaps())
@settings(max_examples=50)
def test_adjacency_is_symmetric_and_stochastic(R):
    """Property: label-count symmetry makes M symmetric with unit row sums."""
    M = normalized_adjacency(R)
    assert np.allclose(M, M.T)
    assert np.allclose(M.sum(axis=1), 1.0)


def test_c4_spectrum():
    spec = spectrum(cycle_rotmap(4))
    assert spec.eigenvalues == pytest.approx([1.0, 0.0, 0.0, -1.0], abs=1e-9)
    assert spec.lam == pytest.approx(1.0)


def test_k4_spectrum():
    spec = spectrum(complete_rotmap(4))
    assert spec.eigenvalues == pytest.approx([1.0, -1 / 3, -1 / 3, -1 / 3], abs=1e-9)
    assert spec.lam == pytest.approx(1 / 3)


def test_single_vertex_has_lambda_zero():
    spec = spectrum(single_loop())
    assert spec.eigenvalues == pytest.approx([1.0])
    assert spec.lam == 0.0


@given(R=rotmaps())
@settings(max_examples=40)
def test_jacobi_matches_lapack(R):
    """Property: the Jacobi solver agrees with eigvalsh to 1e-9."""
    ours = spectrum(R, method="jacobi").eigenvalues
    reference = sorted(np.linalg.eigvalsh(normalized_adjacency(R)), reverse=True)
    assert ours == pytest.approx(reference, abs=1e-9)
    assert ours[0] == pytest.approx(1.0, abs=1e-9)
    assert all(-1 - 1e-9 <= x <= 1 + 1e-9 for x in ours)


def test_component_lambdas_of_disjoint_cycles():
    R = disjoint_rotmaps([cycle_rotmap(3), cycle_rotmap(4)])
    lams = sorted(component_lambdas(R))
    assert lams == pytest.approx([0.5, 1.0])


# =============================================================================
# PROPERTY: Connectivity flags agree with the spectrum
# =============================================================================


def test_connectivity_flags_examples():
    assert connectivity_flags(cycle_rotmap(4)) == (True, True)
    assert connectivity_flags(cycle_rotmap(3)) == (True, False)
    two_loops = RotMapGraph(n=2, D=1, targets=[0, 1])
    assert connectivity_flags(two_loops) == (False, False)


@given(R=rotmaps())
@settings(max_examples=50)
def test_connectivity_cross_check_never_fires(R):
    """Property: traversal and spectral criteria never disagree."""
    connected, _ = connectivity_flags(R)
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(R.n))
    graph.add_edges_from((v, R.rot(v, i)[0]) for v in range(R.n) for i in range(R.D))
    assert connected == nx.is_connected(graph)


# =============================================================================
# PROPERTY: Square and zig-zag
# =============================================================================


def test_square_of_c4():
    S = square(cycle_rotmap(4))
    assert (S.n, S.D) == (4, 4)
    assert validate_rotmap(S).ok
    assert spectrum(S).lam == pytest.approx(1.0)


def test_square_of_single_loop_stays_a_fixed_point():
    S = square(single_loop())
    assert (S.n, S.D, S.targets) == (1, 1, [0])


def test_square_of_k4():
    assert spectrum(square(complete_rotmap(4))).lam == pytest.approx(1 / 9)


@given(R=rotmaps())
@settings(max_examples=100)
def test_square_squares_lambda(R):
    """Property: λ(G²) = λ(G)²."""
    S = square(R)
    assert validate_rotmap(S).ok
    assert abs(spectrum(S).lam - spectrum(R).lam ** 2) <= 1e-8


@given(
    n1=st.integers(min_value=1, max_value=6),
    D1=st.integers(min_value=2, max_value=4),
    D2=st.integers(min_value=1, max_value=3),
    seed=st.integers(min_value=0, max_value=10_000),
)
@settings(max_examples=100, deadline=None)
def test_zigzag_sizes_and_eigenvalue_bound(n1, D1, D2, seed):
    """Property: G1 ⓩ G2 has N1·D1 vertices, degree D2², and λ <= λ1 + λ2."""
    R1 = random_rotmap(n1, D1, seed)
    R2 = random_rotmap(D1, D2, seed + 1)
    Z = zigzag(R1, R2)
    assert (Z.n, Z.D) == (n1 * D1, D2 * D2)
    assert validate_rotmap(Z).ok

    lam1, lam2 = spectrum(R1).lam, spectrum(R2).lam
    if lam1 < 1 - 1e-9 and lam2 < 1 - 1e-9:
        assert spectrum(Z).lam <= lam1 + lam2 + 1e-8


def test_zigzag_rejects_mismatched_sizes():
    with pytest.raises(DimensionMismatch):
        zigzag(cycle_rotmap(5), cycle_rotmap(3))


@given(
    lam1=st.floats(min_value=0.0, max_value=0.999),
    lam2=st.floats(min_value=0.001, max_value=0.999),
)
def test_both_g_variants_stay_below_the_additive_bound(lam1, lam2):
    assert expansion_bound_g(lam1, lam2, "standard") <= lam1 + lam2 + 1e-12
    assert expansion_bound_g(lam1, lam2, "linear") >= expansion_bound_g(lam1, lam2, "standard") - 1e-12


def test_unknown_g_variant_is_rejected():
    with pytest.raises(PreconditionError):
        expansion_bound_g(0.5, 0.5, "quadratic")
    with pytest.raises(PreconditionError):
        expansion_bound_g(0.5, 0.5, "")


# =============================================================================
# PROPERTY: Cheeger inequality and the iterated family
# =============================================================================


@given(R=rotmaps(max_n=10))
@settings(max_examples=30, deadline=None)
def test_cheeger_lower_bound(R):
    """Property: h(G) >= D(1 - λ)/2 by exhaustive subsets."""
    assert cheeger_check(R).satisfied


def test_iterated_family_sizes():
    family = iterated_family(cycle_rotmap(16), 2)
    assert [(G.n, G.D) for G in family] == [(16, 4), (256, 4)]
    assert all(validate_rotmap(G).ok for G in family)


def test_iterated_family_needs_d4_vertices():
    with pytest.raises(DimensionMismatch):
        iterated_family(cycle_rotmap(15), 1)


def test_rotmap_from_graph_matches_complete_rotmap():
    R = rotmap_from_graph(nx.complete_graph(4))
    assert validate_rotmap(R).ok
    assert spectrum(R).eigenvalues == pytest.approx(spectrum(complete_rotmap(4)).eigenvalues)


def test_spectrum_logs(caplog):
    """Property: spectra announce themselves."""
    caplog.set_level(logging.INFO)
    spectrum(cycle_rotmap(5))
    assert any("Spectrum of rotmap n=5" in record.message for record in caplog.records)


# =============================================================================
# What these tests teach:
#
# 1. Violations are DATA, a report with a witness, not an exception
# 2. The solver is checked against LAPACK, not against itself
# 3. Spectral identities (λ(G²) = λ²) are asserted numerically
# 4. Exhaustive oracles bound what we can claim about expansion
# =============================================================================
