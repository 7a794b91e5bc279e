"""
Generalised subgraph freeness.

A marked graph F embeds into G through an injective f such that for every
vertex v of F:

    full      N_G(f(v)) = f(N_F(v))
    semifull  N_G(f(v)) ∩ f(V(F)) = f(N_F(v))
    partial   N_G(f(v)) ⊇ f(N_F(v))

Families are plain lists of MarkedGraph, deduplicated up to marked
isomorphism. Enumerations here are exhaustive and meant for tiny sizes.
"""

import itertools
import logging
from collections import deque
from typing import Callable, Iterable, Iterator, Optional, Sequence

import networkx as nx

from zigzag_proptest.config import get_settings
from zigzag_proptest.errors import BudgetExceeded, CapExceeded, PreconditionError
from zigzag_proptest.models import MARKS, Ball, MarkedGraph, NeighbourhoodProfile
from zigzag_proptest.structures import ball_isomorphic, graph_structure, r_ball

logger = logging.getLogger(__name__)

Embedding = dict[int, int]
Family = list[MarkedGraph]

MARK_RANK = {mark: rank for rank, mark in enumerate(MARKS)}
DEG2_CAP = 14


# =============================================================================
# Embeddings
# =============================================================================


def _search_order(F: MarkedGraph, adj: list[set[int]]) -> list[int]:
    """Component by component, each vertex after one of its neighbours."""
    order: list[int] = []
    seen: set[int] = set()
    for root in sorted(range(F.n), key=lambda v: (-len(adj[v]), MARK_RANK[F.marks[v]], v)):
        if root in seen:
            continue
        seen.add(root)
        queue = deque([root])
        while queue:
            v = queue.popleft()
            order.append(v)
            for u in sorted(adj[v] - seen):
                seen.add(u)
                queue.append(u)
    return order


def iter_embeddings(
    F: MarkedGraph, G: nx.Graph, *, budget: Optional[int] = None
) -> Iterator[Embedding]:
    """All embeddings of F into G, each as {F vertex: G vertex}."""
    if F.n > G.number_of_nodes():
        return
    if F.n == 0:
        yield {}
        return
    budget = budget if budget is not None else get_settings().embed_budget
    adj = [set() for _ in range(F.n)]
    for u, v in F.edges:
        adj[u].add(v)
        adj[v].add(u)
    order = _search_order(F, adj)
    position = {v: k for k, v in enumerate(order)}
    anchor = [next((u for u in adj[v] if position[u] < position[v]), None) for v in order]
    nodes = sorted(G.nodes())
    f: Embedding = {}
    used: set = set()
    steps = 0

    def fits(v: int, w) -> bool:
        deg = G.degree(w)
        if F.marks[v] == "full":
            if deg != len(adj[v]):
                return False
        elif deg < len(adj[v]):
            return False
        strict_v = F.marks[v] != "partial"
        for u, x in f.items():
            if u in adj[v]:
                if not G.has_edge(x, w):
                    return False
            elif G.has_edge(x, w) and (strict_v or F.marks[u] != "partial"):
                return False
        return True

    def extend(depth: int) -> Iterator[Embedding]:
        nonlocal steps
        if depth == len(order):
            yield dict(f)
            return
        v = order[depth]
        a = anchor[depth]
        candidates = sorted(G.neighbors(f[a])) if a is not None else nodes
        for w in candidates:
            if w in used:
                continue
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"embedding search exceeded {budget} nodes")
            if not fits(v, w):
                continue
            f[v] = w
            used.add(w)
            yield from extend(depth + 1)
            del f[v]
            used.discard(w)

    yield from extend(0)


def embed(F: MarkedGraph, G: nx.Graph, *, budget: Optional[int] = None) -> Optional[Embedding]:
    return next(iter_embeddings(F, G, budget=budget), None)


def all_embeddings(F: MarkedGraph, G: nx.Graph, *, budget: Optional[int] = None) -> list[Embedding]:
    return list(iter_embeddings(F, G, budget=budget))


def is_embedding(F: MarkedGraph, G: nx.Graph, f: Embedding) -> bool:
    """Check one map against the three mark conditions directly."""
    if len(f) != F.n or len(set(f.values())) != F.n:
        return False
    image = set(f.values())
    for v in range(F.n):
        mapped = {f[u] for u in _neighbours(F, v)}
        around = set(G.neighbors(f[v]))
        if F.marks[v] == "full" and around != mapped:
            return False
        if F.marks[v] == "semifull" and around & image != mapped:
            return False
        if not mapped <= around:
            return False
    return True


def _neighbours(F: MarkedGraph, v: int) -> set[int]:
    return {b if a == v else a for a, b in F.edges if v in (a, b)}


def is_free(F: MarkedGraph, G: nx.Graph) -> bool:
    return embed(F, G) is None


def is_family_free(family: Iterable[MarkedGraph], G: nx.Graph) -> bool:
    return all(is_free(F, G) for F in family)


def covers(B: Iterable, family: Iterable[MarkedGraph], G: nx.Graph) -> bool:
    """Every embedding of every member hits B."""
    B = set(B)
    for F in family:
        for f in iter_embeddings(F, G):
            if not B & set(f.values()):
                return False
    return True


# =============================================================================
# Isomorphism and deduplication
# =============================================================================


def _marked_nx(F: MarkedGraph) -> nx.Graph:
    graph = F.to_nx()
    nx.set_node_attributes(graph, dict(enumerate(F.marks)), "mark")
    return graph


def _same_mark(a: dict, b: dict) -> bool:
    return a.get("mark") == b.get("mark")


def marked_isomorphic(F1: MarkedGraph, F2: MarkedGraph) -> bool:
    if F1.n != F2.n or len(F1.edges) != len(F2.edges) or sorted(F1.marks) != sorted(F2.marks):
        return False
    return nx.is_isomorphic(_marked_nx(F1), _marked_nx(F2), node_match=_same_mark)


class IsoBuckets:
    """Insertion-ordered set of graphs up to isomorphism, bucketed by WL hash."""

    def __init__(self, marked: bool = False):
        self.marked = marked
        self.items: list = []
        self._buckets: dict[str, list[nx.Graph]] = {}

    def add(self, item) -> bool:
        graph = _marked_nx(item) if self.marked else item
        key = nx.weisfeiler_lehman_graph_hash(graph, node_attr="mark" if self.marked else None)
        bucket = self._buckets.setdefault(key, [])
        match = _same_mark if self.marked else None
        if any(nx.is_isomorphic(graph, other, node_match=match) for other in bucket):
            return False
        bucket.append(graph)
        self.items.append(item)
        return True

    def __len__(self) -> int:
        return len(self.items)


def dedupe(family: Iterable[MarkedGraph]) -> Family:
    seen = IsoBuckets(marked=True)
    for F in family:
        seen.add(F)
    return seen.items


def disjoint(*parts: MarkedGraph) -> MarkedGraph:
    edges, marks, offset = [], [], 0
    for part in parts:
        edges.extend((u + offset, v + offset) for u, v in part.edges)
        marks.extend(part.marks)
        offset += part.n
    return MarkedGraph.of(offset, edges, marks)


# =============================================================================
# Small graph enumeration
# =============================================================================


def _components(n: int, largest: tuple[int, int]) -> Iterator[list[tuple[int, int]]]:
    """Nonincreasing lists of (vertices, kind) summing to n; kind 1 is a cycle."""
    if n == 0:
        yield []
        return
    for size in range(min(n, largest[0]), 0, -1):
        for kind in (1, 0):
            if (size, kind) > largest or (kind == 1 and size < 3):
                continue
            for rest in _components(n - size, (size, kind)):
                yield [(size, kind)] + rest


def deg2_shapes(n: int) -> list[list[tuple[int, int]]]:
    """Component multisets of degree-≤2 graphs on n vertices."""
    if n > DEG2_CAP:
        raise CapExceeded(f"degree-≤2 enumeration is capped at {DEG2_CAP} vertices, got {n}")
    return list(_components(n, (n, 1)))


def _shape_graph(shape: Sequence[tuple[int, int]]) -> nx.Graph:
    graph = nx.Graph()
    offset = 0
    for size, kind in shape:
        part = nx.cycle_graph(size) if kind else nx.path_graph(size)
        graph.add_nodes_from(range(offset, offset + size))
        graph.add_edges_from((u + offset, v + offset) for u, v in part.edges())
        offset += size
    return graph


def enumerate_deg2_graphs(n: int) -> Iterator[nx.Graph]:
    """Every graph of maximum degree 2 on n vertices, once per isomorphism class."""
    for shape in deg2_shapes(n):
        yield _shape_graph(shape)


def enumerate_graphs(n: int, d: int) -> list[nx.Graph]:
    """
    Graphs on n vertices of maximum degree d up to isomorphism, grown one
    vertex at a time from the classes on n-1 vertices.
    """
    if d <= 2:
        return [g for g in enumerate_deg2_graphs(n) if max((x for _, x in g.degree()), default=0) <= d]
    level = [nx.empty_graph(0)]
    for size in range(n):
        grown = IsoBuckets()
        for graph in level:
            open_ = [v for v in graph if graph.degree(v) < d]
            for r in range(min(d, len(open_)) + 1):
                for picks in itertools.combinations(open_, r):
                    h = graph.copy()
                    h.add_node(size)
                    h.add_edges_from((size, v) for v in picks)
                    grown.add(h)
        level = grown.items
    logger.debug(f"{len(level)} graphs on {n} vertices with degree <= {d}")
    return level


# =============================================================================
# Realisations and unions
# =============================================================================


def _ball_size(tau: Ball) -> int:
    return tau.structure.n


def k_realisations(tau: Ball, k: int, d: int, size_cap: int) -> Family:
    """
    Marked graphs that are the union of the r-balls of k centers of type
    tau; vertices closer than r to a center are full, the rest semifull.
    """
    if k < 1:
        raise PreconditionError(f"k must be positive, got {k}")
    r = tau.radius
    m_max = k * _ball_size(tau)
    if m_max > size_cap:
        raise CapExceeded(f"{k} balls of {_ball_size(tau)} vertices exceed the size cap {size_cap}")

    found = IsoBuckets(marked=True)
    for m in range(_ball_size(tau), m_max + 1):
        for graph in enumerate_graphs(m, d):
            A = graph_structure(graph)
            centers = [v for v in range(m) if ball_isomorphic(r_ball(A, v, r), tau)]
            dist = {v: nx.single_source_shortest_path_length(graph, v, cutoff=r) for v in centers}
            for chosen in itertools.combinations(centers, k):
                closest = [min((dist[c].get(v, r + 1) for c in chosen)) for v in range(m)]
                if max(closest) > r:
                    continue
                marks = ["full" if x < r else "semifull" for x in closest]
                found.add(MarkedGraph.of(m, graph.edges(), marks))
    logger.info(f"{len(found)} {k}-realisations of an r={r} type at degree {d}")
    return found.items


def _partial_injections(a: int, b: int) -> Iterator[dict[int, int]]:
    for size in range(min(a, b) + 1):
        for left in itertools.combinations(range(a), size):
            for right in itertools.permutations(range(b), size):
                yield dict(zip(right, left))


def union_family(F1: MarkedGraph, F2: MarkedGraph, size_cap: int) -> Family:
    """
    S(F1, F2): graphs covered by an embedding of each part, marked by the
    strongest mark any part puts on a vertex.
    """
    if F1.n + F2.n > size_cap:
        raise CapExceeded(f"union of {F1.n} and {F2.n} vertices exceeds the size cap {size_cap}")
    found = IsoBuckets(marked=True)
    for glued in _partial_injections(F1.n, F2.n):
        f1 = {v: v for v in range(F1.n)}
        f2, fresh = {}, F1.n
        for v in range(F2.n):
            if v in glued:
                f2[v] = glued[v]
            else:
                f2[v], fresh = fresh, fresh + 1
        n = fresh
        base = {tuple(sorted((f1[u], f1[v]))) for u, v in F1.edges}
        base |= {tuple(sorted((f2[u], f2[v]))) for u, v in F2.edges}
        optional = [
            pair
            for pair in itertools.combinations(range(n), 2)
            if pair not in base and _may_add(pair, (F1, f1), (F2, f2))
        ]
        for r in range(len(optional) + 1):
            for extra in itertools.combinations(optional, r):
                graph = nx.Graph()
                graph.add_nodes_from(range(n))
                graph.add_edges_from(base | set(extra))
                if not (is_embedding(F1, graph, f1) and is_embedding(F2, graph, f2)):
                    continue
                ranks = [2] * n
                for F, f in ((F1, f1), (F2, f2)):
                    for v, x in f.items():
                        ranks[x] = min(ranks[x], MARK_RANK[F.marks[v]])
                marks = [MARKS[rank] for rank in ranks]
                found.add(MarkedGraph.of(n, graph.edges(), marks))
    logger.info(f"Union of {F1.n}- and {F2.n}-vertex graphs: {len(found)} members")
    return found.items


def _may_add(pair: tuple[int, int], *parts: tuple[MarkedGraph, Embedding]) -> bool:
    """Extra edges avoid full images, and join two images of one part only if both are partial."""
    for F, f in parts:
        back = {w: v for v, w in f.items()}
        ends = [back.get(z) for z in pair]
        if any(v is not None and F.marks[v] == "full" for v in ends):
            return False
        if all(v is not None for v in ends) and any(F.marks[v] != "partial" for v in ends):
            return False
    return True


def union_families(family1: Sequence[MarkedGraph], family2: Sequence[MarkedGraph], size_cap: int) -> Family:
    """∪ S(F1, F2) over all pairs; its free graphs are those free of either family."""
    return dedupe(F for F1 in family1 for F2 in family2 for F in union_family(F1, F2, size_cap))


def profile_to_gsf(rho: NeighbourhoodProfile, d: int, size_cap: int) -> Family:
    """Forbid k+1 occurrences of every type capped at [0, k]."""
    if not rho.is_zero_profile:
        raise PreconditionError("only 0-profiles convert to forbidden marked graphs")
    if rho.default.hi is not None:
        raise PreconditionError("unregistered types must be unconstrained ([0,inf))")
    family: Family = []
    for idx, interval in sorted(rho.intervals.items()):
        if interval.hi is None:
            continue
        family.extend(k_realisations(rho.registry.representatives[idx], interval.hi + 1, d, size_cap))
    logger.info(f"0-profile of radius {rho.radius} becomes {len(family)} forbidden marked graphs")
    return dedupe(family)


# =============================================================================
# Degree-≤2 augmentation
# =============================================================================


def f_ij(I: Iterable[int], J: Iterable[int], k: int) -> MarkedGraph:
    """k full paths of length i (edges) per i in I and k full j-cycles per j in J."""
    parts = []
    for i in sorted(I):
        path = MarkedGraph.of(i + 1, [(v, v + 1) for v in range(i)], "full")
        parts.extend([path] * k)
    for j in sorted(J):
        cycle = MarkedGraph.of(j, [(v, (v + 1) % j) for v in range(j)], "full")
        parts.extend([cycle] * k)
    if not parts:
        raise PreconditionError("F_{I,J} needs I or J nonempty")
    return disjoint(*parts)


def f_large(k: int, I: Iterable[int] = (), J: Iterable[int] = ()) -> MarkedGraph:
    """Path of length k+1 with partial ends and full interior, next to F_{I,J}."""
    path = MarkedGraph.of(
        k + 2, [(v, v + 1) for v in range(k + 1)], ["partial"] + ["full"] * k + ["partial"]
    )
    I, J = list(I), list(J)
    return disjoint(f_ij(I, J, k), path) if (I or J) else path


def augmentation_candidates(k: int) -> Iterator[MarkedGraph]:
    yield f_large(k)
    small_paths = range(k)
    cycles = range(3, k + 1)
    # single full components; the full edge F̃ is one of them
    for i in small_paths:
        yield f_ij([i], [], 1)
    for j in cycles:
        yield f_ij([], [j], 1)
    for a in range(len(small_paths) + 1):
        for I in itertools.combinations(small_paths, a):
            for b in range(len(cycles) + 1):
                for J in itertools.combinations(cycles, b):
                    if I or J:
                        yield f_ij(I, J, k)
                        yield f_large(k, I, J)


def deg2_augment(
    family: Sequence[MarkedGraph],
    k: int,
    n: int,
    membership: Optional[Callable[[nx.Graph], bool]] = None,
    *,
    d: int = 2,
) -> Family:
    """
    F'_n: the family plus every candidate that all n-vertex members of the
    property avoid. Members are found among the degree-≤2 graphs on n
    vertices; by default a graph is a member when it is family-free.
    """
    if d > 2:
        raise PreconditionError(f"augmentation works for degree at most 2, got {d}")
    inside = membership if membership is not None else (lambda g: is_family_free(family, g))
    members = [
        g
        for g in enumerate_deg2_graphs(n)
        if max((x for _, x in g.degree()), default=0) <= d and inside(g)
    ]
    added = [F for F in augmentation_candidates(k) if all(is_free(F, g) for g in members)]
    logger.info(f"n={n}: {len(members)} member graphs, {len(added)} augmentation graphs admitted")
    return dedupe(list(family) + added)


def tau_function(k: int) -> Callable[[float], float]:
    """τ(ε) = min(1, 8k³ε) on (0, 1]."""

    def tau(eps: float) -> float:
        if not 0.0 < eps <= 1.0:
            raise PreconditionError(f"τ is defined on (0, 1], got {eps}")
        return min(1.0, 8 * k**3 * eps)

    return tau


def odd_example_family(n: int, *, fixed: bool = False) -> Family:
    """
    Degree-1 example: a full edge next to a full isolated vertex, plus the
    full 2-path marker forbidding degree 2. With fixed=True, odd n also
    forbids a single full edge.
    """
    edge_and_point = MarkedGraph.of(3, [(0, 1)], "full")
    no_degree_two = MarkedGraph.of(3, [(0, 1), (1, 2)], ["partial", "full", "partial"])
    family = [edge_and_point, no_degree_two]
    if fixed and n % 2 == 1:
        family.append(MarkedGraph.of(2, [(0, 1)], "full"))
    return family
