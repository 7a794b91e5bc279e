"""
Local reduction from bounded-degree structures to 3-regular graphs.

Every element a becomes a d-cycle u_{a,0..d-1}. Slot (a, i) hangs a chain
v^1..v^{6ℓ+5} off u_{a,i}; the chain is half of a k-arrow when the i-th
tuple of a is a binary tuple (a, b) or (b, a) of relation k, a whole k-loop
for (a, a), and a non-arrow when a has fewer than i+1 tuples.

Vertex layout, fixed by |A| alone:

    id(a, i, off) = a*d*(6ℓ+6) + i*(6ℓ+6) + off

with off 0 for u_{a,i} and off p for v^p_{a,i}. Arrows run from the tail
element (first tuple entry) to the head; position q of the arrow gadget is
v^{q+1} on the tail side and v^{2(6ℓ+5)-q} on the head side.

Relation indices k are 0-based positions in the signature; the H2 block of
a k-arrow or k-loop sits in slot k.
"""

import logging
import threading
from collections import deque
from functools import lru_cache
from typing import Optional

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from zigzag_proptest.config import get_settings
from zigzag_proptest.errors import (
    CapExceeded,
    ConsistencyError,
    PatternMismatch,
    PreconditionError,
)
from zigzag_proptest.models import (
    Gadget,
    NeighbourhoodProfile,
    ReducedGraph,
    Signature,
    Structure,
)
from zigzag_proptest.structures import (
    StructureIndex,
    element_types,
    graph_structure,
    new_registry,
    root_profiles,
)

logger = logging.getLogger(__name__)

Answer = Optional[tuple[int, tuple[int, ...]]]  # (relation index, tuple) or ⊥

SHORT_CYCLE = 8  # every block vertex lies on a cycle of at most this length


# =============================================================================
# Building blocks
# =============================================================================

BLOCK_SIZES = {"H1": 6, "H2": 6, "H3": 10, "H4": 5}
BLOCK_CHORDS = {
    "H1": ((0, 3), (1, 4), (2, 5)),
    "H2": ((0, 5), (1, 3), (2, 4)),
    "H3": ((0, 9), (1, 3), (2, 4), (5, 7), (6, 8)),
    "H4": ((0, 3), (1, 4), (2, 4)),
}
# The literal H2 chord list joins u_0 to u_6, which is not a vertex of the block
LITERAL_H2_CHORDS = ((0, 6), (1, 3), (2, 4))


def block(kind: str, *, strict: bool = False) -> Gadget:
    """
    Path u_0..u_{s-1} plus the chords of the block. strict=True uses the
    literal H2 chord list and rejects it.
    """
    if kind not in BLOCK_SIZES:
        raise PreconditionError(f"unknown block {kind!r}")
    size = BLOCK_SIZES[kind]
    chords = LITERAL_H2_CHORDS if strict and kind == "H2" else BLOCK_CHORDS[kind]
    for u, v in chords:
        if not (0 <= u < size and 0 <= v < size):
            raise PatternMismatch(f"{kind} chord {{u_{u}, u_{v}}} leaves u_0..u_{size - 1}")
    graph = nx.path_graph(size)
    graph.add_edges_from(chords)
    ends = (0,) if kind == "H4" else (0, size - 1)
    return Gadget(kind=kind, graph=graph, ends=ends)


def _chain(kinds: list[str]) -> nx.Graph:
    """Blocks in order, v of each joined to u of the next."""
    graph = nx.Graph()
    offset = 0
    for s, kind in enumerate(kinds):
        piece = block(kind).graph
        graph.add_edges_from((u + offset, v + offset) for u, v in piece.edges())
        if s:
            graph.add_edge(offset - 1, offset)
        offset += BLOCK_SIZES[kind]
    return graph


def _check_k(k: int, ell: int) -> None:
    if ell < 1:
        raise PreconditionError("ℓ must be at least 1")
    if not 0 <= k < ell:
        raise PreconditionError(f"relation index {k} outside 0..{ell - 1}")


def arrow(k: int, ell: int) -> Gadget:
    """2ℓ six-vertex blocks (H2 in slot k) then H3: 12ℓ+10 vertices."""
    _check_k(k, ell)
    kinds = ["H2" if s == k else "H1" for s in range(2 * ell)] + ["H3"]
    graph = _chain(kinds)
    return Gadget(kind="arrow", graph=graph, ends=(0, graph.number_of_nodes() - 1), k=k)


def loop(k: int, ell: int) -> Gadget:
    """ℓ six-vertex blocks (H2 in slot k) then H4: 6ℓ+5 vertices."""
    _check_k(k, ell)
    kinds = ["H2" if s == k else "H1" for s in range(ell)] + ["H4"]
    return Gadget(kind="loop", graph=_chain(kinds), ends=(0,), k=k)


def nonarrow(ell: int) -> Gadget:
    if ell < 1:
        raise PreconditionError("ℓ must be at least 1")
    return Gadget(kind="nonarrow", graph=_chain(["H1"] * ell + ["H4"]), ends=(0,))


@lru_cache(maxsize=None)
def _gadget_adjacency(kind: str, k: int, ell: int) -> tuple[tuple[int, ...], ...]:
    if kind == "arrow":
        gadget = arrow(k, ell)
    elif kind == "loop":
        gadget = loop(k, ell)
    else:
        gadget = nonarrow(ell)
    g = gadget.graph
    return tuple(tuple(sorted(g.adj[q])) for q in range(g.number_of_nodes()))


# =============================================================================
# Layout and the structure oracle
# =============================================================================


class ReductionLayout(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0)  # elements
    d: int = Field(ge=3)
    ell: int = Field(ge=1)

    @property
    def chain(self) -> int:
        return 6 * self.ell + 5

    @property
    def stride(self) -> int:
        return self.chain + 1

    @property
    def vertices(self) -> int:
        return self.n * self.d * self.stride

    def vertex(self, a: int, i: int, off: int) -> int:
        return (a * self.d + i) * self.stride + off

    def locate(self, v: int) -> tuple[int, int, int]:
        if not 0 <= v < self.vertices:
            raise PreconditionError(f"vertex {v} outside 0..{self.vertices - 1}")
        slot, off = divmod(v, self.stride)
        a, i = divmod(slot, self.d)
        return a, i, off


def c2(d: int) -> int:
    """Structure queries needed per simulated graph query."""
    return d + 1


def tuple_lists(A: Structure) -> list[list[tuple[int, tuple[int, ...]]]]:
    """Per element, its tuples as (relation index, tuple) in ascending order."""
    rank = {name: k for k, name in enumerate(A.sig.names)}
    index = StructureIndex(A)
    return [sorted((rank[name], t) for name, t in index.incidence[a]) for a in range(A.n)]


class StructureOracle:
    """
    ans(a, i) over a structure: the i-th tuple containing a as
    (relation index, tuple), or None past the last one. Thread-safe; every
    call is counted.
    """

    def __init__(self, A: Structure, d: int):
        self.structure = A
        self.d = d
        self._lists = tuple_lists(A)
        self._lock = threading.Lock()
        self._queries = 0
        if self._lists and max(len(ts) for ts in self._lists) > d:
            raise PreconditionError(f"structure has degree above {d}")

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def queries(self) -> int:
        with self._lock:
            return self._queries

    def query(self, a: int, i: int) -> Answer:
        if not (0 <= a < self.n and 0 <= i < self.d):
            raise PreconditionError(f"query ({a}, {i}) outside {self.n} elements x {self.d} slots")
        with self._lock:
            self._queries += 1
        ts = self._lists[a]
        return ts[i] if i < len(ts) else None


# =============================================================================
# The reduction
# =============================================================================


def _require_binary(sig: Signature) -> None:
    bad = [rel.name for rel in sig.relations if rel.arity != 2]
    if bad:
        raise PreconditionError(f"the reduction handles binary relations only, got {bad}")


def reduce(A: Structure, d: int, *, cap: Optional[int] = None) -> ReducedGraph:
    """
    f(A): element cycles, pendant chains and one gadget per slot.

    |V| = d(6ℓ+6)|A| and the result is 3-regular.
    """
    _require_binary(A.sig)
    ell = len(A.sig.relations)
    if ell == 0:
        raise PreconditionError("signature has no relations")
    layout = ReductionLayout(n=A.n, d=d, ell=ell)
    cap = cap if cap is not None else get_settings().cap_vertices
    if layout.vertices > cap:
        raise CapExceeded(f"reduced graph has {layout.vertices} vertices (cap {cap})")

    lists = tuple_lists(A)
    for a, ts in enumerate(lists):
        if len(ts) > d:
            raise PreconditionError(f"element {a} lies in {len(ts)} tuples, more than d={d}")
    slot_of = {(a, ans): i for a, ts in enumerate(lists) for i, ans in enumerate(ts)}

    C = layout.chain
    graph = nx.Graph()
    graph.add_nodes_from(range(layout.vertices))
    for a in range(A.n):
        for i in range(d):
            u = layout.vertex(a, i, 0)
            graph.add_edge(u, layout.vertex(a, (i + 1) % d, 0))
            graph.add_edge(u, layout.vertex(a, i, 1))

            ans = lists[a][i] if i < len(lists[a]) else None
            if ans is None:
                adjacency = _gadget_adjacency("nonarrow", 0, ell)
            else:
                k, t = ans
                if t[0] != t[1]:
                    if t[0] != a:
                        continue  # placed from the tail side
                    j = slot_of[(t[1], ans)]
                    adjacency = _gadget_adjacency("arrow", k, ell)

                    def place(q: int, a=a, i=i, b=t[1], j=j) -> int:
                        if q < C:
                            return layout.vertex(a, i, q + 1)
                        return layout.vertex(b, j, 2 * C - q)

                    for q, around in enumerate(adjacency):
                        graph.add_edges_from((place(q), place(w)) for w in around if w > q)
                    continue
                adjacency = _gadget_adjacency("loop", k, ell)
            for q, around in enumerate(adjacency):
                graph.add_edges_from(
                    (layout.vertex(a, i, q + 1), layout.vertex(a, i, w + 1)) for w in around if w > q
                )

    cycles = {a: [layout.vertex(a, i, 0) for i in range(d)] for a in range(A.n)}
    logger.info(f"Reduced {A.n} elements (d={d}, ℓ={ell}) to {layout.vertices} vertices")
    return ReducedGraph(graph=graph, d=d, ell=ell, cycles=cycles)


def simulate_query(oracle: StructureOracle, ell: int, v: int, i: int) -> int:
    """
    The i-th smallest neighbour of v in f(A), answered through the oracle
    with at most d+1 structure queries.
    """
    if not 0 <= i < 3:
        raise PreconditionError(f"graph query index {i} outside 0..2")
    d = oracle.d
    layout = ReductionLayout(n=oracle.n, d=d, ell=ell)
    a, s, off = layout.locate(v)
    C = layout.chain
    used = 0

    def ask(b: int, j: int) -> Answer:
        nonlocal used
        used += 1
        return oracle.query(b, j)

    if off == 0:
        around = [layout.vertex(a, (s - 1) % d, 0), layout.vertex(a, (s + 1) % d, 0), layout.vertex(a, s, 1)]
    else:
        ans = ask(a, s)
        around = [layout.vertex(a, s, 0)] if off == 1 else []
        if ans is None or ans[1][0] == ans[1][1]:
            kind, k = ("nonarrow", 0) if ans is None else ("loop", ans[0])
            around += [layout.vertex(a, s, w + 1) for w in _gadget_adjacency(kind, k, ell)[off - 1]]
        else:
            k, t = ans
            tail_side = t[0] == a
            partner = t[1] if tail_side else t[0]
            pos = off - 1 if tail_side else 2 * C - off
            partner_slot: Optional[int] = None
            for w in _gadget_adjacency("arrow", k, ell)[pos]:
                if (w < C) == tail_side:
                    around.append(layout.vertex(a, s, w + 1 if tail_side else 2 * C - w))
                    continue
                if partner_slot is None:
                    partner_slot = next((j for j in range(d) if ask(partner, j) == ans), None)
                    if partner_slot is None:
                        raise ConsistencyError(f"tuple {t} missing from element {partner}'s answers")
                around.append(layout.vertex(partner, partner_slot, 2 * C - w if tail_side else w + 1))

    if used > c2(d):
        raise ConsistencyError(f"graph query used {used} structure queries, more than {c2(d)}")
    return sorted(around)[i]


# =============================================================================
# Pattern matching and decoding
# =============================================================================


def _on_short_cycle(adj: dict[int, list[int]], x: int, limit: int = SHORT_CYCLE) -> bool:
    """Shortest cycle through x via BFS: a non-tree edge between different branches."""
    dist = {x: 0}
    branch = {x: x}
    queue = deque([x])
    reach = limit // 2
    while queue:
        p = queue.popleft()
        for q in adj[p]:
            if q == x:
                continue
            if q not in dist:
                if dist[p] < reach:
                    dist[q] = dist[p] + 1
                    branch[q] = q if p == x else branch[p]
                    queue.append(q)
                continue
            if p != x and branch[q] != branch[p] and dist[p] + dist[q] + 1 <= limit:
                return True
    return False


class MatchedGadget(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str  # arrow, loop or nonarrow
    k: Optional[int] = None
    tail: int  # element vertex the gadget hangs off (tail of an arrow)
    head: Optional[int] = None
    vertices: frozenset[int]


class ReducedShape:
    """
    A 3-regular graph matched against the image of the reduction: element
    cycles and one classified gadget per element vertex. Raises
    PatternMismatch at the first vertex that fits nowhere.
    """

    def __init__(self, graph: nx.Graph, ell: int):
        self.graph = graph
        self.ell = ell
        adj = {v: list(graph.adj[v]) for v in graph.nodes()}
        for v, around in adj.items():
            if len(around) != 3:
                raise PatternMismatch(f"degree {len(around)}, expected 3", vertex=v)

        self.element_vertices = {v for v in adj if not _on_short_cycle(adj, v)}
        self.cycles: list[list[int]] = []
        self.element_of: dict[int, int] = {}
        self._find_cycles(adj)
        self.gadgets: list[MatchedGadget] = []
        self.gadget_at: dict[int, int] = {}  # element vertex or gadget vertex -> gadget index
        self._match_gadgets(adj)
        logger.info(
            f"Matched {len(self.cycles)} element cycles and {len(self.gadgets)} gadgets "
            f"in {graph.number_of_nodes()} vertices"
        )

    @property
    def d(self) -> int:
        return len(self.cycles[0]) if self.cycles else 0

    def _find_cycles(self, adj: dict[int, list[int]]) -> None:
        inside = self.element_vertices
        for v in sorted(inside):
            if v in self.element_of:
                continue
            ring = [w for w in adj[v] if w in inside]
            if len(ring) != 2:
                raise PatternMismatch(f"element vertex with {len(ring)} element neighbours", vertex=v)
            cycle, prev, cur = [v], v, min(ring)
            while cur != v:
                step = [w for w in adj[cur] if w in inside]
                if len(step) != 2:
                    raise PatternMismatch("element cycle breaks off", vertex=cur)
                cycle.append(cur)
                prev, cur = cur, step[0] if step[1] == prev else step[1]
            if self.cycles and len(cycle) != len(self.cycles[0]):
                raise PatternMismatch(
                    f"element cycle of length {len(cycle)}, expected {len(self.cycles[0])}", vertex=v
                )
            for w in cycle:
                self.element_of[w] = len(self.cycles)
            self.cycles.append(cycle)
        if self.cycles and len(self.cycles[0]) <= SHORT_CYCLE:
            raise PatternMismatch(f"element cycles of length {len(self.cycles[0])} are too short")

    def _match_gadgets(self, adj: dict[int, list[int]]) -> None:
        rest = self.graph.subgraph(v for v in adj if v not in self.element_vertices)
        arrow_size, hang_size = 12 * self.ell + 10, 6 * self.ell + 5
        for comp in nx.connected_components(rest):
            low = min(comp)
            attach = sorted(
                (w, v) for v in comp for w in adj[v] if w in self.element_vertices
            )  # (element vertex, gadget end)
            if len(comp) == arrow_size and len(attach) == 2:
                gadget = self._match_arrow(nx.Graph(rest.subgraph(comp)), attach)
            elif len(comp) == hang_size and len(attach) == 1:
                gadget = self._match_hanging(nx.Graph(rest.subgraph(comp)), attach[0])
            else:
                raise PatternMismatch(
                    f"gadget of {len(comp)} vertices with {len(attach)} attachments", vertex=low
                )
            idx = len(self.gadgets)
            self.gadgets.append(gadget)
            for v in comp:
                self.gadget_at[v] = idx
            for w, _ in attach:
                if w in self.gadget_at:
                    raise PatternMismatch("element vertex carries two gadgets", vertex=w)
                self.gadget_at[w] = idx

    def _blocks(
        self, sub: nx.Graph, start: int, end: Optional[int] = None
    ) -> list[tuple[str, int, Optional[int]]]:
        """Blocks from start outwards as (kind, entry, exit); end closes the last block."""
        cut = list(nx.bridges(sub))
        body = sub.copy()
        body.remove_edges_from(cut)
        across: dict[int, int] = {}
        for u, v in cut:
            across[u], across[v] = v, u
        out = []
        entry: Optional[int] = start
        seen: set[int] = set()
        while entry is not None:
            comp = nx.node_connected_component(body, entry)
            if comp & seen:
                raise PatternMismatch("gadget blocks do not form a path", vertex=entry)
            seen |= comp
            exits = [v for v in comp if v in across and v != entry and across[v] not in seen]
            if len(exits) > 1:
                raise PatternMismatch("gadget block with several exits", vertex=entry)
            exit_ = exits[0] if exits else (end if end in comp and end != entry else None)
            out.append((self._classify(body.subgraph(comp), entry, exit_), entry, exit_))
            entry = across.get(exit_) if exit_ is not None else None
        if len(seen) != sub.number_of_nodes():
            raise PatternMismatch("gadget has vertices off its block path", vertex=min(sub.nodes()))
        return out

    def _classify(self, piece: nx.Graph, entry: int, exit_: Optional[int]) -> str:
        size = piece.number_of_nodes()
        ends = {entry: 1} if exit_ is None else {entry: 1, exit_: 2}
        candidates = [kind for kind, s in BLOCK_SIZES.items() if s == size]
        for kind in candidates:
            ref = block(kind)
            if len(ref.ends) != len(ends):
                continue
            ref_ends = {ref.ends[0]: 1} if len(ref.ends) == 1 else {ref.ends[0]: 1, ref.ends[1]: 2}
            g1 = ref.graph.copy()
            nx.set_node_attributes(g1, {v: ref_ends.get(v, 0) for v in g1.nodes()}, "end")
            g2 = nx.Graph(piece)
            nx.set_node_attributes(g2, {v: ends.get(v, 0) for v in g2.nodes()}, "end")
            if nx.is_isomorphic(g1, g2, node_match=lambda x, y: x["end"] == y["end"]):
                return kind
        raise PatternMismatch(f"{size}-vertex piece matches no building block", vertex=entry)

    def _slot_k(self, kinds: list[str], slots: int, vertex: int) -> Optional[int]:
        body = kinds[:slots]
        if any(kind not in ("H1", "H2") for kind in body):
            raise PatternMismatch("unexpected block inside a gadget", vertex=vertex)
        marked = [s for s, kind in enumerate(body) if kind == "H2"]
        if len(marked) > 1:
            raise PatternMismatch("gadget with several H2 blocks", vertex=vertex)
        return marked[0] if marked else None

    def _match_arrow(self, sub: nx.Graph, attach: list[tuple[int, int]]) -> MatchedGadget:
        for (tail, start), (head, end) in (attach, attach[::-1]):
            blocks = self._blocks(sub, start, end)
            kinds = [kind for kind, _, _ in blocks]
            if kinds[-1] != "H3":
                continue
            if len(kinds) != 2 * self.ell + 1 or blocks[-1][2] != end:
                raise PatternMismatch("malformed arrow", vertex=start)
            k = self._slot_k(kinds, 2 * self.ell, start)
            if k is None or k >= self.ell:
                raise PatternMismatch("arrow without H2 in its first ℓ slots", vertex=start)
            return MatchedGadget(kind="arrow", k=k, tail=tail, head=head, vertices=frozenset(sub.nodes()))
        raise PatternMismatch("arrow without an H3 end", vertex=attach[0][1])

    def _match_hanging(self, sub: nx.Graph, attach: tuple[int, int]) -> MatchedGadget:
        tail, start = attach
        blocks = self._blocks(sub, start)
        kinds = [kind for kind, _, _ in blocks]
        if len(kinds) != self.ell + 1 or kinds[-1] != "H4":
            raise PatternMismatch("malformed loop or non-arrow", vertex=start)
        k = self._slot_k(kinds, self.ell, start)
        kind = "nonarrow" if k is None else "loop"
        return MatchedGadget(kind=kind, k=k, tail=tail, vertices=frozenset(sub.nodes()))


def match_shape(graph: nx.Graph, ell: int) -> ReducedShape:
    return ReducedShape(graph, ell)


def decode(graph: nx.Graph, sig: Signature) -> tuple[Structure, dict[int, list[int]]]:
    """
    Structure A_G with f(A_G) ≅ G, plus the element -> cycle correspondence.
    Elements are numbered by the smallest vertex of their cycle.
    """
    _require_binary(sig)
    shape = match_shape(graph, len(sig.relations))
    names = sig.names
    tuples: dict[str, set] = {name: set() for name in names}
    for gadget in shape.gadgets:
        if gadget.kind == "nonarrow":
            continue
        a = shape.element_of[gadget.tail]
        b = a if gadget.head is None else shape.element_of[gadget.head]
        name = names[gadget.k]
        if (a, b) in tuples[name]:
            raise PatternMismatch(f"tuple ({a},{b}) of {name} drawn twice", vertex=gadget.tail)
        tuples[name].add((a, b))
    A = Structure.build(sig, len(shape.cycles), tuples)
    logger.info(f"Decoded {A.n} elements, {A.tuple_count()} tuples")
    return A, {a: cycle for a, cycle in enumerate(shape.cycles)}


# =============================================================================
# Predicates on reduced-shape graphs
# =============================================================================


def alpha(shape: ReducedShape, v: int) -> bool:
    """v is an element vertex."""
    return v in shape.element_of


def beta(shape: ReducedShape, u: int, v: int) -> bool:
    """u and v lie on the same element cycle."""
    return alpha(shape, u) and alpha(shape, v) and shape.element_of[u] == shape.element_of[v]


def gamma(shape: ReducedShape, v: int) -> bool:
    """v is an internal vertex of an arrow, loop or non-arrow."""
    return v in shape.gadget_at and not alpha(shape, v)


def delta_arrow(shape: ReducedShape, k: int, u: int, v: int) -> bool:
    """There is a k-arrow from element vertex u to element vertex v."""
    if not (alpha(shape, u) and alpha(shape, v)):
        return False
    gadget = shape.gadgets[shape.gadget_at[u]]
    return gadget.kind == "arrow" and gadget.k == k and gadget.tail == u and gadget.head == v


def delta_loop(shape: ReducedShape, k: int, u: int) -> bool:
    if not alpha(shape, u):
        return False
    gadget = shape.gadgets[shape.gadget_at[u]]
    return gadget.kind == "loop" and gadget.k == k


def delta_nonarrow(shape: ReducedShape, u: int) -> bool:
    return alpha(shape, u) and shape.gadgets[shape.gadget_at[u]].kind == "nonarrow"


# =============================================================================
# Graph profiles
# =============================================================================


def ell_prime_of(ell: int, d: int) -> int:
    """ℓ' = 24ℓ + 18 + d: radius at which a vertex sees the 2-ball of its element."""
    return 24 * ell + 18 + d


def ell_prime(D: int) -> int:
    """ℓ' for σ(D): ℓ = 3D⁴+1, d = 2D²+D⁴+1."""
    return ell_prime_of(3 * D**4 + 1, 2 * D * D + D**4 + 1)


def rho_hat_builder(
    structures: list[Structure], d: int, *, roots: Optional[list[int]] = None
) -> list[NeighbourhoodProfile]:
    """
    Graph profiles of radius ℓ' from the reductions of the given structures.
    The type of u_{r,0} for the root r of each structure plays the root type.
    """
    if not structures:
        raise PreconditionError("rho_hat_builder needs at least one structure")
    roots = roots if roots is not None else [0] * len(structures)
    radius = ell_prime_of(len(structures[0].sig.relations), d)
    logger.info(f"Graph profiles at radius ℓ'={radius} over {len(structures)} structures")

    reg = new_registry(radius)
    typed = []
    for A, r in zip(structures, roots):
        reduced = reduce(A, d)
        types = element_types(graph_structure(reduced.graph), radius, reg)
        typed.append((types[reduced.cycles[r][0]], types))
    return root_profiles(reg, typed)
