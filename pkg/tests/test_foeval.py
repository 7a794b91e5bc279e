"""
Tests for formula parsing, evaluation and the zig-zag formula family.

The generated formulas are cross-checked against the direct validators on
the 17-element model and its mutants.
"""

import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from zigzag_proptest.errors import BudgetExceeded, DimensionMismatch, FormulaSyntaxError, UnboundVariable
from zigzag_proptest.foeval import (
    Count,
    Forall,
    atom,
    evaluate,
    expand_counting,
    f_name,
    free_variables,
    parse,
    parse_with_header,
    phi_root,
    phi_zigzag,
    prefix_class,
    quantifier_depth,
    sigma,
    to_sexpr,
)
from zigzag_proptest.graphcore import cycle_rotmap, square
from zigzag_proptest.models import GRAPH_SIGNATURE, Structure
from zigzag_proptest.structures import graph_structure
from zigzag_proptest.zzmodel import build_model, random_mutation, validate_model

H = cycle_rotmap(16)

EVERY_VERTEX_HAS_TWO = "(forall x (exists= 2 y (E x y)))"


@pytest.fixture(scope="module")
def formulas():
    return phi_zigzag(2, H, square(H))


@pytest.fixture(scope="module")
def model():
    return build_model(H, 1)


@st.composite
def small_graphs(draw, max_n=5):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = list(itertools.combinations(range(n), 2))
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    graph = nx.empty_graph(n)
    graph.add_edges_from(edges)
    return graph


# =============================================================================
# PROPERTY: Reading and printing
# =============================================================================


@pytest.mark.parametrize(
    "text",
    [
        EVERY_VERTEX_HAS_TWO,
        "(exists x (and (E x x) (not (= x y))))",
        "(-> (E x y) (or (E y x) (exists<= 0 z (E z z))))",
    ],
)
def test_print_reads_back(text):
    phi = parse(text)
    assert to_sexpr(phi) == text
    assert parse(to_sexpr(phi)) == phi


@pytest.mark.parametrize(
    "text, position",
    [
        ("(and (E x y)", 12),
        ("(exists>= k x (E x x))", 10),
        ("(E x y) )", 8),
        ("()", 1),
    ],
)
def test_syntax_errors_carry_positions(text, position):
    with pytest.raises(FormulaSyntaxError) as err:
        parse(text)
    assert err.value.position == position


def test_signature_checks_names_and_arities():
    with pytest.raises(FormulaSyntaxError):
        parse("(F x y)", GRAPH_SIGNATURE)
    with pytest.raises(FormulaSyntaxError):
        parse("(E x)", GRAPH_SIGNATURE)


def test_header_declares_the_signature():
    sig, phi = parse_with_header("rel E 2\nrel P 1\n(forall x (-> (P x) (E x x)))")
    assert sig.names == ["E", "P"]
    assert quantifier_depth(phi) == 1


# =============================================================================
# PROPERTY: Syntactic measures
# =============================================================================


@pytest.mark.parametrize(
    "text, expected",
    [
        ("(E x y)", "Σ0"),
        ("(exists x (E x x))", "Σ1"),
        ("(forall x (exists y (E x y)))", "Π2"),
        ("(exists<= 1 x (E x x))", "Π1"),
        ("(exists= 1 x (forall y (E x y)))", "Σ2"),
        ("(and (exists x (E x x)) (E y y))", "non-prenex"),
    ],
)
def test_prefix_classes(text, expected):
    assert prefix_class(parse(text)) == expected


def test_free_variables_and_depth():
    phi = parse("(and (exists x (E x y)) (forall z (exists w (E z w))))")
    assert free_variables(phi) == {"y"}
    assert quantifier_depth(phi) == 2


# =============================================================================
# PROPERTY: Evaluation
# =============================================================================


def test_counting_on_cycles_and_paths():
    phi = parse(EVERY_VERTEX_HAS_TWO)
    assert evaluate(graph_structure(nx.cycle_graph(4)), phi)
    assert not evaluate(graph_structure(nx.path_graph(3)), phi)
    assert not evaluate(graph_structure(nx.cycle_graph(4)), parse("(exists>= 3 y (E x y))"), {"x": 0})


def test_root_formula_on_one_parent_edge():
    A = Structure(sig=sigma(2), n=2, tuples={f_name(0): frozenset({(0, 1)})})
    assert evaluate(A, phi_root(2), {"x": 0})
    assert not evaluate(A, phi_root(2), {"x": 1})


def test_evaluation_errors():
    C4 = graph_structure(nx.cycle_graph(4))
    with pytest.raises(UnboundVariable):
        evaluate(C4, parse("(E x y)"), {"x": 0})
    with pytest.raises(DimensionMismatch):
        evaluate(C4, parse("(forall x (F x x))"))
    with pytest.raises(BudgetExceeded):
        evaluate(C4, parse("(forall x (forall y (or (E x y) (not (E x y)))))"), budget=5)


@given(
    graph=small_graphs(),
    kind=st.sampled_from([">=", "=", "<="]),
    m=st.integers(min_value=0, max_value=3),
)
@settings(max_examples=60)
def test_expanded_counting_agrees(graph, kind, m):
    """Property: replacing counting quantifiers by plain ones keeps the truth value."""
    phi = Forall(var="x", body=Count(kind=kind, m=m, var="y", body=atom("E", "x", "y")))
    A = graph_structure(graph)
    expanded = expand_counting(phi)
    assert not any(head in to_sexpr(expanded) for head in ("exists>=", "exists=", "exists<="))
    assert evaluate(A, expanded) == evaluate(A, phi)


# =============================================================================
# PROPERTY: The zig-zag formulas agree with the validators
# =============================================================================


def test_formulas_are_sentences(formulas):
    assert free_variables(formulas.full) == frozenset()
    assert formulas.sig.names[-1] == "R"


def test_model_satisfies_the_formulas(formulas, model):
    assert evaluate(model.structure, formulas.full)


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=10)
def test_conjuncts_match_validators_on_mutants(formulas, model, seed):
    """Property: each conjunct holds exactly when its validator passes."""
    mutant, _ = random_mutation(model.structure, seed)
    reports = validate_model(mutant, 2, H)
    for name in ("tree", "rotation_map", "base", "recursion"):
        assert evaluate(mutant, getattr(formulas, name)) == reports[name].ok, name


# =============================================================================
# What these tests teach:
#
# 1. Printed formulas read back to the same tree
# 2. Counting quantifiers are checked against their plain expansion
# 3. Two independent checkers of one property are tested against each other
# =============================================================================
