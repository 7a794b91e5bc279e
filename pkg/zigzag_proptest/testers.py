"""
Bounded-degree property testers.

Testers see a graph only through an oracle: ans(v, i) is the i-th neighbour
of v in sorted order, or None when v has at most i neighbours. Samples are
drawn with a generator keyed by (seed, sample index), so a run is
reproducible regardless of how samples are spread over threads.
"""

import itertools
import logging
import math
import threading
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import networkx as nx
import numpy as np

from zigzag_proptest.config import get_settings
from zigzag_proptest.errors import BudgetExceeded, CapExceeded, PreconditionError
from zigzag_proptest.models import GRAPH_SIGNATURE, Ball, Structure, TesterVerdict, TypeRegistry
from zigzag_proptest.structures import (
    StructureIndex,
    ball_isomorphic,
    classify,
    graph_structure,
    new_registry,
    r_ball,
    structure_graph,
)

logger = logging.getLogger(__name__)

Membership = Callable[[int], bool]
Decision = Callable[[nx.Graph], bool]
Shape = tuple[tuple[int, bool], ...]

FLIP_DISTANCE_CAP = 8
DEG2_DISTANCE_CAP = 12
RELABELING_CAP = 6


# =============================================================================
# Oracle
# =============================================================================


class GraphOracle:
    """Neighbour queries over a simple graph of maximum degree d."""

    def __init__(self, graph: nx.Graph, d: int, *, seed: int = 0):
        nodes = sorted(graph.nodes())
        index = {v: k for k, v in enumerate(nodes)}
        self._adj = [sorted(index[w] for w in graph.neighbors(v) if w != v) for v in nodes]
        if any(len(ws) > d for ws in self._adj):
            raise PreconditionError(f"graph has a vertex of degree above {d}")
        self.d = d
        self.seed = seed
        self._lock = threading.Lock()
        self._queries = 0

    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def queries(self) -> int:
        with self._lock:
            return self._queries

    def query(self, v: int, i: int) -> Optional[int]:
        if not (0 <= v < self.n and 0 <= i < self.d):
            raise PreconditionError(f"query ({v}, {i}) outside {self.n} vertices x {self.d} slots")
        with self._lock:
            self._queries += 1
        ws = self._adj[v]
        return ws[i] if i < len(ws) else None

    def sample_vertex(self, index: int) -> int:
        """Uniform vertex for sample number `index`; free of charge."""
        if self.n == 0:
            raise PreconditionError("cannot sample from the empty graph")
        rng = np.random.default_rng([self.seed, index])
        return int(rng.integers(self.n))


def neighbours(o: GraphOracle, v: int) -> list[int]:
    """All neighbours of v; stops at the first empty slot."""
    found = []
    for i in range(o.d):
        w = o.query(v, i)
        if w is None:
            break
        found.append(w)
    return found


def explore_ball(o: GraphOracle, v: int, r: int) -> Ball:
    """
    r-ball of v by breadth-first neighbour queries. Every vertex of the
    ball is queried once, so edges between vertices at distance r are seen.
    """
    dist = {v: 0}
    adj: dict[int, list[int]] = {}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        adj[x] = neighbours(o, x)
        if dist[x] == r:
            continue
        for w in adj[x]:
            if w not in dist:
                dist[w] = dist[x] + 1
                queue.append(w)

    order = sorted(dist, key=lambda x: (dist[x], x))
    remap = {x: k for k, x in enumerate(order)}
    edges = {(remap[x], remap[w]) for x in order for w in adj[x] if w in remap}
    sub = Structure.build(GRAPH_SIGNATURE, len(order), {"E": edges})
    return Ball.model_construct(structure=sub, center=0, radius=r, distances=[dist[x] for x in order])


def explore_graph(o: GraphOracle) -> nx.Graph:
    """The whole graph, n·d queries at most."""
    graph = nx.Graph()
    graph.add_nodes_from(range(o.n))
    for v in range(o.n):
        graph.add_edges_from((v, w) for w in neighbours(o, v))
    return graph


def _sample_balls(o: GraphOracle, r: int, indices: Sequence[int], threads: int) -> list[Ball]:
    explore = lambda k: explore_ball(o, o.sample_vertex(k), r)  # noqa: E731
    if threads <= 1 or len(indices) < 2:
        return [explore(k) for k in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(explore, indices))


# =============================================================================
# Sampling
# =============================================================================


def sample_size(t: int, lam: float) -> int:
    """s = ⌈(t²/λ²)·ln(t+40)⌉."""
    if t < 1:
        raise PreconditionError(f"t must be at least 1, got {t}")
    if not 0.0 < lam <= 1.0:
        raise PreconditionError(f"λ must lie in (0, 1], got {lam}")
    return math.ceil((t * t) / (lam * lam) * math.log(t + 40))


def estimate_frequencies(
    o: GraphOracle, r: int, s: int, reg: TypeRegistry, *, threads: int = 1
) -> list[float]:
    """
    Sample s vertices, explore their r-balls and return the frequency of
    every registered type (types first seen here are registered too).
    Balls are classified in sample order, so type indices do not depend on
    the thread count.
    """
    if s < 1:
        raise PreconditionError(f"sample count must be at least 1, got {s}")
    if o.n == 0:
        raise PreconditionError("cannot estimate frequencies on the empty graph")
    counts: Counter = Counter()
    for ball in _sample_balls(o, r, range(s), threads):
        counts[classify(reg, ball)] += 1
    logger.info(f"Estimated {r}-type frequencies from {s} samples: {len(counts)} types seen")
    return [counts[idx] / s for idx in range(len(reg))]


# =============================================================================
# Framework tester
# =============================================================================


def framework_tester(
    o: GraphOracle,
    M: Membership,
    n0: int,
    lam: float,
    F: Sequence[Ball],
    exact: Decision,
    *,
    r: Optional[int] = None,
    complement: bool = False,
    max_samples: Optional[int] = None,
    threads: int = 1,
) -> TesterVerdict:
    """
    1. Reject if n ∈ M.
    2. If n < n0, decide exactly on the fully explored graph.
    3. Sample s = sample_size(t, λ) balls, t the number of types known
       after classifying F.
    4. Reject iff some sampled ball has a forbidden type.

    With complement=True the forbidden types are all types except those in F.
    Sampling stops at the first forbidden ball.
    """
    start = o.queries
    n = o.n
    if M(n):
        logger.info(f"Rejected n={n}: n is in M")
        return TesterVerdict(accept=False, queries=0, cause="M")

    if n < n0:
        graph = explore_graph(o)
        accept = bool(exact(graph))
        logger.info(f"Exact phase on n={n} < n0={n0}: {'accept' if accept else 'reject'}")
        return TesterVerdict(accept=accept, queries=o.queries - start, cause=None if accept else "exact")

    if not F and not complement:
        return TesterVerdict(accept=True, queries=0)

    radius = r if r is not None else F[0].radius
    reg = new_registry(radius)
    listed = {classify(reg, ball) for ball in F}
    s = sample_size(len(reg), lam)
    if max_samples is not None and s > max_samples:
        logger.warning(f"Capping {s} samples at {max_samples}")
        s = max_samples

    def forbidden(idx: int) -> bool:
        return (idx not in listed) if complement else (idx in listed)

    counts: Counter = Counter()
    drawn = 0
    chunk = max(1, 8 * threads) if threads > 1 else 1
    rejected = False
    while drawn < s and not rejected:
        batch = range(drawn, min(s, drawn + chunk))
        for ball in _sample_balls(o, radius, batch, threads):
            idx = classify(reg, ball)
            counts[idx] += 1
            rejected = rejected or forbidden(idx)
        drawn = batch.stop

    distribution = {idx: c / drawn for idx, c in sorted(counts.items())}
    queries = o.queries - start
    logger.info(
        f"Sampled {drawn}/{s} balls of radius {radius}, {len(reg)} types, "
        f"{queries} queries: {'reject' if rejected else 'accept'}"
    )
    return TesterVerdict(
        accept=not rejected,
        queries=queries,
        cause="forbidden" if rejected else None,
        samples=drawn,
        distribution=distribution,
    )


# =============================================================================
# Ball helpers
# =============================================================================


def _ball_graph(tau: Ball) -> tuple[nx.Graph, dict[int, int]]:
    if not tau.structure.sig.same_as(GRAPH_SIGNATURE):
        raise PreconditionError("testers work on graph balls over {E/2}")
    graph = structure_graph(tau.structure)
    dist = nx.single_source_shortest_path_length(graph, tau.center)
    return graph, dist


def graph_ball(graph: nx.Graph, v: int, r: int) -> Ball:
    A = graph_structure(graph)
    return r_ball(A, sorted(graph.nodes()).index(v), r)


def is_tau_free(graph: nx.Graph, tau: Ball) -> bool:
    """No vertex has an r-ball rooted-isomorphic to tau."""
    A = graph_structure(graph)
    index = StructureIndex(A)
    return not any(ball_isomorphic(r_ball(A, v, tau.radius, index=index), tau) for v in range(A.n))


def is_tau_regular(graph: nx.Graph, tau: Ball) -> bool:
    """Every vertex has an r-ball rooted-isomorphic to tau."""
    A = graph_structure(graph)
    index = StructureIndex(A)
    return all(ball_isomorphic(r_ball(A, v, tau.radius, index=index), tau) for v in range(A.n))


# =============================================================================
# Freeness
# =============================================================================


def freeness_parameters(tau: Ball, d: int, eps: float) -> tuple[Membership, int, float, bool]:
    """(M, n0, λ, forbid) for testing tau-freeness on graphs of degree <= d."""
    r = tau.radius
    if r < 1:
        raise PreconditionError("freeness of a 0-type is not supported")
    if not 0.0 < eps <= 1.0:
        raise PreconditionError(f"ε must lie in (0, 1], got {eps}")
    graph, dist = _ball_graph(tau)
    degs = dict(graph.degree())
    never: Membership = lambda n: False  # noqa: E731

    if max(degs.values(), default=0) > d:
        logger.info("Forbidden type exceeds the degree bound; every graph is free of it")
        return never, 1, eps, False
    if all(degs[v] == d for v, k in dist.items() if k < r):
        return never, 1, eps, True

    lam = eps * d / (14 * (1 + d ** (2 * r + 1)))
    n0 = math.ceil(2 * d * d / eps)
    if d == 1 and tau.structure.n == 1:
        return (lambda n: n % 2 == 1), n0, lam, True
    return never, n0, lam, True


def freeness_tester(
    o: GraphOracle, tau: Ball, eps: float, *, max_samples: Optional[int] = None, threads: int = 1
) -> TesterVerdict:
    M, n0, lam, forbid = freeness_parameters(tau, o.d, eps)
    logger.info(f"Freeness tester: r={tau.radius}, d={o.d}, ε={eps}, n0={n0}, λ={lam:.3g}")
    return framework_tester(
        o,
        M,
        n0,
        lam,
        [tau] if forbid else [],
        lambda graph: is_tau_free(graph, tau),
        r=tau.radius,
        max_samples=max_samples,
        threads=threads,
    )


# =============================================================================
# Regularity
# =============================================================================


def _clique_condition(graph: nx.Graph, center: int) -> bool:
    around = graph.subgraph(list(graph.neighbors(center)))
    for comp in nx.connected_components(around):
        k = len(comp)
        if around.subgraph(comp).number_of_edges() != k * (k - 1) // 2:
            return False
    return True


def maxcl(B: Ball, i: int, *, d: Optional[int] = None) -> int:
    """Number of maximal cliques of size i that contain the center."""
    if B.radius != 1:
        raise PreconditionError(f"maxcl needs a 1-ball, got radius {B.radius}")
    if d is not None and B.structure.n > d + 1:
        raise PreconditionError(f"ball of {B.structure.n} vertices exceeds degree {d}")
    graph, _ = _ball_graph(B)
    return sum(1 for clique in nx.find_cliques(graph) if B.center in clique and len(clique) == i)


def regularity_M(tau: Ball, d: int) -> Membership:
    counts = {i: maxcl(tau, i) for i in range(1, d + 2)}
    return lambda n: any((c * n) % i != 0 for i, c in counts.items())


def regularity_tester(
    o: GraphOracle, tau: Ball, eps: float, *, max_samples: Optional[int] = None, threads: int = 1
) -> TesterVerdict:
    if tau.radius != 1:
        raise PreconditionError(f"regularity is tested for 1-types, got radius {tau.radius}")
    graph, _ = _ball_graph(tau)
    if not _clique_condition(graph, tau.center):
        raise PreconditionError("the type is not a disjoint union of cliques around its center")
    d = o.d
    lam = eps / (20 * d**6)
    n0 = 20 * d**8
    logger.info(f"Regularity tester: d={d}, ε={eps}, n0={n0}, λ={lam:.3g}")
    return framework_tester(
        o,
        regularity_M(tau, d),
        n0,
        lam,
        [tau],
        lambda g: is_tau_regular(g, tau),
        r=1,
        complement=True,
        max_samples=max_samples,
        threads=threads,
    )


# =============================================================================
# Exact distance
# =============================================================================


def _within_degree(graph: nx.Graph, d: int) -> bool:
    return all(deg <= d for _, deg in graph.degree())


def _edge_set(graph: nx.Graph) -> set[tuple[int, int]]:
    return {(min(u, v), max(u, v)) for u, v in graph.edges()}


def brute_distance(
    graph: nx.Graph,
    P: Callable[[nx.Graph], bool],
    d: int,
    *,
    mode: str = "edges",
    cap: Optional[int] = None,
    budget: Optional[int] = None,
) -> float:
    """
    Fewest edge insertions and deletions turning graph into a member of P
    with maximum degree d; math.inf when P has no such n-vertex member.

    mode="edges" tries flip sets in order of size (n <= 8). mode="deg2"
    scans the degree-≤2 graphs on n vertices up to isomorphism (n <= 12).
    When graph has maximum degree 2 as well, the best relabeling comes from
    cutting both component multisets into common paths; otherwise every
    relabeling is tried, which needs n <= 6.
    """
    nodes = sorted(graph.nodes())
    n = len(nodes)
    default_cap = DEG2_DISTANCE_CAP if mode == "deg2" else FLIP_DISTANCE_CAP
    limit = cap if cap is not None else default_cap
    if n > limit:
        raise CapExceeded(f"exact distance on {n} vertices exceeds the cap {limit}")
    graph = nx.convert_node_labels_to_integers(graph, ordering="sorted")
    budget = budget if budget is not None else get_settings().embed_budget

    if mode == "edges":
        return _distance_by_flips(graph, P, d, budget)
    if mode == "deg2":
        return _distance_by_deg2(graph, P, d, budget)
    raise PreconditionError(f"unknown distance mode {mode!r}")


def _distance_by_flips(graph: nx.Graph, P, d: int, budget: int) -> float:
    n = graph.number_of_nodes()
    pairs = list(itertools.combinations(range(n), 2))
    steps = 0
    for k in range(len(pairs) + 1):
        for flips in itertools.combinations(pairs, k):
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"distance search exceeded {budget} candidates")
            candidate = graph.copy()
            for u, v in flips:
                if candidate.has_edge(u, v):
                    candidate.remove_edge(u, v)
                else:
                    candidate.add_edge(u, v)
            if _within_degree(candidate, d) and P(candidate):
                logger.debug(f"Distance {k} after {steps} candidates")
                return k
    return math.inf


def _distance_by_deg2(graph: nx.Graph, P, d: int, budget: int) -> float:
    from zigzag_proptest.gsf import enumerate_deg2_graphs

    n = graph.number_of_nodes()
    shape = deg2_shape(graph)
    if shape is None and n > RELABELING_CAP:
        raise CapExceeded(
            f"graph of degree above 2 on {n} vertices; relabeling search is capped at {RELABELING_CAP}"
        )
    own = _edge_set(graph)
    best = math.inf
    steps = 0
    for candidate in enumerate_deg2_graphs(n):
        if not (_within_degree(candidate, d) and P(candidate)):
            continue
        if shape is not None:
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"distance search exceeded {budget} candidates")
            common = n - fewest_common_paths(shape, deg2_shape(candidate))
            best = min(best, len(own) + candidate.number_of_edges() - 2 * common)
        else:
            target = list(candidate.edges())
            for perm in itertools.permutations(range(n)):
                steps += 1
                if steps > budget:
                    raise BudgetExceeded(f"distance search exceeded {budget} relabelings")
                moved = {(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in target}
                best = min(best, len(own ^ moved))
        if best == 0:
            return 0
    logger.debug(f"Degree-2 distance {best} after {steps} steps")
    return best


def deg2_shape(graph: nx.Graph) -> Optional[Shape]:
    """Sorted (size, is_cycle) per component; None above degree 2."""
    if not _within_degree(graph, 2):
        return None
    parts = []
    for comp in nx.connected_components(graph):
        parts.append((len(comp), graph.subgraph(comp).number_of_edges() == len(comp)))
    return tuple(sorted(parts))


@lru_cache(maxsize=None)
def fewest_common_paths(shape1: Shape, shape2: Shape) -> int:
    """
    Fewest paths both shapes can be cut into, after pairing off equal
    cycles kept whole. Two degree-≤2 graphs on n vertices then share at
    most n minus this many edges under any relabeling.

    Cut parts that are glued into one component on either side form a
    group with equal vertex totals on both sides; a group of p parts and q
    parts needs p + q - 1 paths, so the search maximizes the group count.
    """
    lengths = sorted({s for s, cyc in shape1 if cyc} & {s for s, cyc in shape2 if cyc})
    ranges = [
        range(min(shape1.count((s, True)), shape2.count((s, True))) + 1) for s in lengths
    ]
    best = math.inf
    for kept in itertools.product(*ranges):
        a = _sizes_left(shape1, dict(zip(lengths, kept)))
        b = _sizes_left(shape2, dict(zip(lengths, kept)))
        best = min(best, len(a) + len(b) - _equal_sum_groups(a, b))
    return best


def _sizes_left(shape: Shape, kept: dict[int, int]) -> tuple[int, ...]:
    left = dict(kept)
    sizes = []
    for size, cyc in shape:
        if cyc and left.get(size, 0) > 0:
            left[size] -= 1
        else:
            sizes.append(size)
    return tuple(sorted(sizes))


def _sub_multisets(parts: tuple[int, ...]):
    counts = Counter(parts)
    values = sorted(counts)
    for picks in itertools.product(*(range(counts[v] + 1) for v in values)):
        chosen = [v for v, c in zip(values, picks) for _ in range(c)]
        rest = [v for v, c in zip(values, picks) for _ in range(counts[v] - c)]
        yield tuple(chosen), tuple(rest)


@lru_cache(maxsize=None)
def _equal_sum_groups(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """Most blocks in a joint split of a and b with equal sums per block."""
    if not a:
        return 0
    first, others = a[0], a[1:]
    best = 0
    for chosen_a, rest_a in _sub_multisets(others):
        total = first + sum(chosen_a)
        for chosen_b, rest_b in _sub_multisets(b):
            if chosen_b and sum(chosen_b) == total:
                best = max(best, 1 + _equal_sum_groups(rest_a, rest_b))
    return best


# =============================================================================
# Monte-Carlo harness
# =============================================================================


def run_trials(
    tester: Callable[[GraphOracle], TesterVerdict],
    oracle_factory: Callable[[int], GraphOracle],
    seeds: Iterable[int],
    *,
    threads: int = 1,
) -> list[TesterVerdict]:
    """One verdict per seed, in seed order. Each trial gets its own oracle."""
    seeds = list(seeds)
    run = lambda seed: tester(oracle_factory(seed))  # noqa: E731
    if threads <= 1:
        return [run(seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, seeds))


def rejection_rate(
    tester: Callable[[GraphOracle], TesterVerdict],
    oracle_factory: Callable[[int], GraphOracle],
    seeds: Iterable[int],
    *,
    threads: int = 1,
) -> float:
    verdicts = run_trials(tester, oracle_factory, seeds, threads=threads)
    if not verdicts:
        raise PreconditionError("rejection rate over no seeds")
    rate = sum(1 for v in verdicts if not v.accept) / len(verdicts)
    logger.info(f"Rejection rate {rate:.3f} over {len(verdicts)} trials")
    return rate
