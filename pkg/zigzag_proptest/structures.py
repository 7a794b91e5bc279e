"""
Finite relational structures and their neighbourhood statistics.

Gaifman graphs, r-balls, rooted isomorphism of balls, a lazily grown type
registry, histogram vectors, sampling distances and neighbourhood profiles.
"""

import logging
from collections import Counter
from typing import Iterable, Optional

import networkx as nx

from zigzag_proptest.errors import DimensionMismatch, PreconditionError
from zigzag_proptest.models import (
    GRAPH_SIGNATURE,
    Ball,
    Interval,
    NeighbourhoodProfile,
    SamplingDistance,
    Signature,
    Structure,
    TypeRegistry,
)

logger = logging.getLogger(__name__)

Incident = tuple[str, tuple[int, ...]]


# =============================================================================
# Indexing
# =============================================================================


class StructureIndex:
    """Per-element incident tuples and the Gaifman graph, built once."""

    def __init__(self, A: Structure):
        self.structure = A
        self.incidence: list[list[Incident]] = [[] for _ in range(A.n)]
        graph = nx.Graph()
        graph.add_nodes_from(range(A.n))
        for name in A.sig.names:
            for t in sorted(A.rel(name)):
                members = set(t)
                for e in members:
                    self.incidence[e].append((name, t))
                if len(members) > 1:
                    ordered = sorted(members)
                    for i, u in enumerate(ordered):
                        for v in ordered[i + 1:]:
                            graph.add_edge(u, v)
        self.graph = graph

    def degree(self, a: int) -> int:
        return len(self.incidence[a])


def gaifman(A: Structure) -> nx.Graph:
    """Edge {v, w} iff v != w occur together in some tuple."""
    return StructureIndex(A).graph


def degree(A: Structure, a: int) -> int:
    """Number of tuples containing a; a self-tuple counts once."""
    return sum(1 for name in A.sig.names for t in A.rel(name) if a in t)


def degrees(A: Structure) -> list[int]:
    return [len(inc) for inc in StructureIndex(A).incidence]


def max_degree(A: Structure) -> int:
    return max(degrees(A), default=0)


# =============================================================================
# Construction helpers
# =============================================================================


def graph_structure(graph: nx.Graph) -> Structure:
    """Simple graph as a symmetric irreflexive {E}-structure on 0..n-1."""
    nodes = sorted(graph.nodes())
    index = {v: k for k, v in enumerate(nodes)}
    edges = set()
    for u, v in graph.edges():
        if u == v:
            continue
        a, b = index[u], index[v]
        edges.add((a, b))
        edges.add((b, a))
    return Structure(sig=GRAPH_SIGNATURE, n=len(nodes), tuples={"E": frozenset(edges)})


def structure_graph(A: Structure, relation: str = "E") -> nx.Graph:
    """Undirected simple graph of one binary relation, self-tuples dropped."""
    graph = nx.Graph()
    graph.add_nodes_from(range(A.n))
    graph.add_edges_from((u, v) for u, v in A.rel(relation) if u != v)
    return graph


def disjoint_union(A: Structure, B: Structure) -> Structure:
    if not A.sig.same_as(B.sig):
        raise DimensionMismatch("disjoint union needs one signature")
    tuples = {
        name: A.rel(name) | frozenset(tuple(e + A.n for e in t) for t in B.rel(name))
        for name in A.sig.names
    }
    return Structure.build(A.sig, A.n + B.n, tuples)


def disjoint_copies(parts: Iterable[Structure], sig: Signature, extra_isolated: int = 0) -> Structure:
    """Disjoint union of many structures plus isolated elements at the end."""
    tuples: dict[str, set] = {name: set() for name in sig.names}
    offset = 0
    for part in parts:
        for name in sig.names:
            tuples[name].update(tuple(e + offset for e in t) for t in part.rel(name))
        offset += part.n
    return Structure.build(sig, offset + extra_isolated, tuples)


def edit_distance(A: Structure, B: Structure, d: int) -> float:
    """Σ_R |R^A △ R^B| / (d·n) on a shared universe."""
    if A.n != B.n or not A.sig.same_as(B.sig):
        raise DimensionMismatch("edit distance needs equal universes and signatures")
    if A.n == 0:
        return 0.0
    changed = sum(len(A.rel(name) ^ B.rel(name)) for name in A.sig.names)
    return changed / (d * A.n)


# =============================================================================
# Balls
# =============================================================================


def r_ball(A: Structure, a: int, r: int, *, index: Optional[StructureIndex] = None) -> Ball:
    """
    Induced substructure on N_r(a). The center becomes element 0, the rest
    are ordered by (distance, original id).
    """
    if not 0 <= a < A.n:
        raise PreconditionError(f"element {a} outside universe of size {A.n}")
    index = index or StructureIndex(A)
    dist = nx.single_source_shortest_path_length(index.graph, a, cutoff=r)
    order = sorted(dist, key=lambda v: (dist[v], v))
    remap = {v: k for k, v in enumerate(order)}

    tuples: dict[str, set] = {name: set() for name in A.sig.names}
    for v in order:
        for name, t in index.incidence[v]:
            if all(e in remap for e in t):
                tuples[name].add(tuple(remap[e] for e in t))

    sub = Structure.build(A.sig, len(order), tuples)
    return Ball.model_construct(
        structure=sub, center=0, radius=r, distances=[dist[v] for v in order]
    )


def _initial_colour(index: StructureIndex, ball: Ball, v: int) -> tuple:
    profile = Counter()
    for name, t in index.incidence[v]:
        positions = tuple(p for p, e in enumerate(t) if e == v)
        profile[(name, positions)] += 1
    return (ball.distances[v], tuple(sorted(profile.items())))


def _refine(balls: list[Ball], indexes: list[StructureIndex]) -> list[list[int]]:
    """
    Joint colour refinement over several balls so colours are comparable.

    Each round recolours v by its old colour plus the multiset of
    (relation, own positions, entry colours) over its incident tuples.
    """
    keys = [[_initial_colour(ix, b, v) for v in range(b.structure.n)] for b, ix in zip(balls, indexes)]
    palette = {key: c for c, key in enumerate(sorted({k for ks in keys for k in ks}))}
    colours = [[palette[k] for k in ks] for ks in keys]
    classes = len(palette)

    while True:
        keys = []
        for col, ix, b in zip(colours, indexes, balls):
            round_keys = []
            for v in range(b.structure.n):
                around = sorted(
                    (name, tuple(p for p, e in enumerate(t) if e == v), tuple(col[e] for e in t))
                    for name, t in ix.incidence[v]
                )
                round_keys.append((col[v], tuple(around)))
            keys.append(round_keys)
        palette = {key: c for c, key in enumerate(sorted({k for ks in keys for k in ks}))}
        colours = [[palette[k] for k in ks] for ks in keys]
        if len(palette) == classes:
            return colours
        classes = len(palette)


def _check_comparable(B1: Ball, B2: Ball) -> None:
    if not B1.structure.sig.same_as(B2.structure.sig):
        raise DimensionMismatch("balls over different signatures")
    if B1.radius != B2.radius:
        raise DimensionMismatch(f"balls of radius {B1.radius} and {B2.radius}")


def ball_isomorphic(B1: Ball, B2: Ball) -> bool:
    """
    Rooted isomorphism by backtracking.

    Candidates are pruned by refined colours (which start from distance to
    the root and per-relation incidence). Vertices are matched in BFS order,
    so every step after the root is adjacent to something already mapped.
    """
    _check_comparable(B1, B2)
    S1, S2 = B1.structure, B2.structure
    if S1.n != S2.n:
        return False
    if any(len(S1.rel(name)) != len(S2.rel(name)) for name in S1.sig.names):
        return False

    ix1, ix2 = StructureIndex(S1), StructureIndex(S2)
    c1, c2 = _refine([B1, B2], [ix1, ix2])
    if sorted(c1) != sorted(c2) or c1[B1.center] != c2[B2.center]:
        return False

    by_colour: dict[int, list[int]] = {}
    for w in range(S2.n):
        by_colour.setdefault(c2[w], []).append(w)

    order = sorted(range(S1.n), key=lambda v: (B1.distances[v], v))
    forward: dict[int, int] = {}
    backward: dict[int, int] = {}

    def consistent(v: int, w: int) -> bool:
        for name, t in ix1.incidence[v]:
            if all(e in forward for e in t):
                if tuple(forward[e] for e in t) not in S2.rel(name):
                    return False
        for name, t in ix2.incidence[w]:
            if all(e in backward for e in t):
                if tuple(backward[e] for e in t) not in S1.rel(name):
                    return False
        return True

    # explicit stack: balls can be deeper than the recursion limit
    stack = [iter([B2.center]) if order[0] == B1.center else iter(by_colour[c1[order[0]]])]
    while stack:
        depth = len(stack) - 1
        v = order[depth]
        if v in forward:
            w_old = forward.pop(v)
            del backward[w_old]
        advanced = False
        for w in stack[-1]:
            if w in backward or c2[w] != c1[v]:
                continue
            forward[v], backward[w] = w, v
            if consistent(v, w):
                advanced = True
                break
            del forward[v], backward[w]
        if not advanced:
            stack.pop()
            continue
        if depth + 1 == len(order):
            return True
        stack.append(iter(by_colour[c1[order[depth + 1]]]))
    return False


# =============================================================================
# Type registry
# =============================================================================


def _bucket_key(ball: Ball) -> tuple:
    ix = StructureIndex(ball.structure)
    S = ball.structure
    shape = tuple(sorted(Counter(zip(ball.distances, (ix.degree(v) for v in range(S.n)))).items()))
    counts = tuple(len(S.rel(name)) for name in S.sig.names)
    return (S.n, counts, shape)


def new_registry(r: int) -> TypeRegistry:
    return TypeRegistry(radius=r)


def classify(reg: TypeRegistry, B: Ball) -> int:
    """Index of B's type in reg; B becomes a new representative if unmatched."""
    if B.radius != reg.radius:
        raise DimensionMismatch(f"ball radius {B.radius} vs registry radius {reg.radius}")
    key = _bucket_key(B)
    bucket = reg._buckets.setdefault(key, [])
    for idx in bucket:
        if ball_isomorphic(reg.representatives[idx], B):
            return idx
    reg.representatives.append(B)
    bucket.append(len(reg.representatives) - 1)
    logger.debug(f"Registered r={reg.radius} type #{len(reg.representatives) - 1} ({B.structure.n} elements)")
    return len(reg.representatives) - 1


def copy_registry(reg: TypeRegistry) -> TypeRegistry:
    """Scratch copy that can grow without touching reg."""
    clone = TypeRegistry(radius=reg.radius, representatives=list(reg.representatives))
    clone._buckets = {k: list(v) for k, v in reg._buckets.items()}
    return clone


def element_types(A: Structure, r: int, reg: TypeRegistry) -> list[int]:
    """Type index of every element."""
    index = StructureIndex(A)
    return [classify(reg, r_ball(A, a, r, index=index)) for a in range(A.n)]


def histogram(A: Structure, r: int, reg: TypeRegistry) -> list[int]:
    """Counts per registered type index; sums to |A|."""
    if r != reg.radius:
        raise DimensionMismatch(f"radius {r} vs registry radius {reg.radius}")
    types = element_types(A, r, reg)
    counts = [0] * len(reg)
    for t in types:
        counts[t] += 1
    logger.info(f"Histogram r={r}: {A.n} elements, {sum(1 for c in counts if c)} types present")
    return counts


def type_distribution(A: Structure, r: int, reg: TypeRegistry) -> list[float]:
    if A.n == 0:
        raise PreconditionError("type distribution of the empty structure")
    return [c / A.n for c in histogram(A, r, reg)]


# =============================================================================
# Sampling distance
# =============================================================================


def sampling_distance_r(
    A: Structure, B: Structure, r: int, reg: Optional[TypeRegistry] = None
) -> float:
    """Half the L1 distance between the r-type distributions of A and B."""
    if A.n == 0 or B.n == 0:
        raise PreconditionError("sampling distance needs nonempty structures")
    reg = reg if reg is not None else new_registry(r)
    pa = type_distribution(A, r, reg)
    pb = type_distribution(B, r, reg)
    size = len(reg)
    pa += [0.0] * (size - len(pa))
    pb += [0.0] * (size - len(pb))
    return 0.5 * sum(abs(x - y) for x, y in zip(pa, pb))


def sampling_distance(A: Structure, B: Structure, r_max: int) -> SamplingDistance:
    """Σ_{r<=r_max} 2^-r δ^r, with the tail Σ_{r>r_max} 2^-r δ^r <= 2^{1-r_max} reported."""
    if r_max < 0:
        raise PreconditionError("r_max must be nonnegative")
    terms = [sampling_distance_r(A, B, r) for r in range(r_max + 1)]
    value = sum(term / 2**r for r, term in enumerate(terms))
    logger.info(f"Sampling distance up to r={r_max}: {value:.6f}")
    return SamplingDistance(value=value, tail_bound=2.0 ** (1 - r_max), r_max=r_max, terms=terms)


# =============================================================================
# Profiles
# =============================================================================


def make_profile(
    reg: TypeRegistry, intervals: dict[int, Interval], default: Optional[Interval] = None
) -> NeighbourhoodProfile:
    return NeighbourhoodProfile(
        radius=reg.radius,
        registry=reg,
        intervals=intervals,
        default=default if default is not None else Interval(lo=0, hi=0),
    )


def obeys_profile(A: Structure, rho: NeighbourhoodProfile) -> bool:
    """
    Every registered type count lies in its interval; types without an
    interval, including ones A introduces, must fit the default interval.
    """
    scratch = copy_registry(rho.registry)
    counts = histogram(A, rho.radius, scratch)
    for idx, count in enumerate(counts):
        interval = rho.intervals.get(idx, rho.default)
        if count not in interval:
            logger.debug(f"Type #{idx} occurs {count} times, outside {interval}")
            return False
    return True


def root_profiles(reg: TypeRegistry, typed: Iterable[tuple[int, Iterable[int]]]) -> list[NeighbourhoodProfile]:
    """
    One 0-profile per distinct root type, from (root type, all types of the
    structure) pairs: the root type gets [0,1], every other type seen next to
    that root type [0,∞), everything else the default [0,0].
    """
    observed: dict[int, set[int]] = {}
    for root_type, types in typed:
        observed.setdefault(root_type, set()).update(types)
    profiles = []
    for root_type, seen in observed.items():
        intervals = {t: Interval(lo=0) for t in seen}
        intervals[root_type] = Interval(lo=0, hi=1)
        profiles.append(make_profile(reg, intervals))
    return profiles
