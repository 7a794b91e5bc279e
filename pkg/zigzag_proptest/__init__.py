"""
zigzag-proptest - zig-zag expander models and bounded-degree property testing.

Rotation maps and their products, models of the zig-zag formula over an
edge-coloured signature, the local reduction to 3-regular graphs,
neighbourhood types, generalised subgraph freeness and the testers.
"""

from zigzag_proptest.foeval import evaluate, parse, phi_zigzag, sigma
from zigzag_proptest.graphcore import (
    connectivity_flags,
    iterated_family,
    normalized_adjacency,
    spectrum,
    square,
    validate_rotmap,
    zigzag,
)
from zigzag_proptest.gsf import (
    all_embeddings,
    covers,
    deg2_augment,
    embed,
    enumerate_deg2_graphs,
    is_family_free,
    k_realisations,
    profile_to_gsf,
    union_family,
)
from zigzag_proptest.models import Ball, MarkedGraph, RotMapGraph, Structure, TesterVerdict
from zigzag_proptest.reduction import decode, reduce, rho_hat_builder, simulate_query
from zigzag_proptest.structures import (
    ball_isomorphic,
    classify,
    histogram,
    obeys_profile,
    r_ball,
    sampling_distance,
)
from zigzag_proptest.testers import (
    GraphOracle,
    estimate_frequencies,
    framework_tester,
    freeness_tester,
    regularity_tester,
    sample_size,
)
from zigzag_proptest.zzmodel import build_model, build_rho_k, underlying_graph, validate_model

__version__ = "0.1.0"

# Ordered from cheap read-only checks to operations that materialize large objects
__all__ = [
    # Data
    "RotMapGraph",
    "Structure",
    "Ball",
    "MarkedGraph",
    "TesterVerdict",
    # Checks
    "validate_rotmap",
    "connectivity_flags",
    "ball_isomorphic",
    "embed",
    "is_family_free",
    "covers",
    "evaluate",
    "parse",
    "obeys_profile",
    "validate_model",
    # Measurements
    "normalized_adjacency",
    "spectrum",
    "r_ball",
    "classify",
    "histogram",
    "sampling_distance",
    "sample_size",
    # Testers
    "GraphOracle",
    "estimate_frequencies",
    "framework_tester",
    "freeness_tester",
    "regularity_tester",
    "simulate_query",
    # Constructions
    "square",
    "zigzag",
    "iterated_family",
    "sigma",
    "phi_zigzag",
    "build_model",
    "underlying_graph",
    "build_rho_k",
    "reduce",
    "decode",
    "rho_hat_builder",
    "all_embeddings",
    "k_realisations",
    "union_family",
    "profile_to_gsf",
    "enumerate_deg2_graphs",
    "deg2_augment",
]
