"""
Rotation-map multigraph kernel.

Square, zig-zag product, spectra, expansion ratio and the iterated expander
family G_1 = H^2, G_m = G_{m-1}^2 ⓩ H.

Labels are integers. The square relabels (k1, k2) as k1*D + k2; the zig-zag
product numbers vertex (v, k) as v*D1 + k and label (i, j) as i*D2 + j.
"""

import logging
import math
from typing import Optional

import networkx as nx
import numpy as np

from zigzag_proptest.config import get_settings
from zigzag_proptest.errors import (
    CapExceeded,
    ConsistencyError,
    DimensionMismatch,
    InvalidRotmap,
    PreconditionError,
)
from zigzag_proptest.models import CheegerReport, RotMapGraph, Spectrum, ValidationReport

logger = logging.getLogger(__name__)

EXPANSION_MAX_VERTICES = 20
SPECTRAL_FLAG_TOL = 1e-7


# =============================================================================
# Generators
# =============================================================================


def cycle_rotmap(n: int) -> RotMapGraph:
    """Canonical 2-regular rotation map of C_n: rot(v,0)=(v+1,1), rot(v,1)=(v-1,0)."""
    if n < 1:
        raise PreconditionError("cycle needs at least one vertex")
    targets = []
    for v in range(n):
        targets.append(((v + 1) % n) * 2 + 1)
        targets.append(((v - 1) % n) * 2 + 0)
    return RotMapGraph(n=n, D=2, targets=targets)


def complete_rotmap(n: int) -> RotMapGraph:
    """K_n with label i at v pointing to the i-th vertex other than v."""
    if n < 2:
        raise PreconditionError("complete graph needs at least two vertices")
    D = n - 1
    targets = []
    for v in range(n):
        for i in range(D):
            w = i if i < v else i + 1
            j = v if v < w else v - 1
            targets.append(w * D + j)
    return RotMapGraph(n=n, D=D, targets=targets)


def random_rotmap(n: int, D: int, seed: int = 0, *, fixed_point_rate: float = 0.1) -> RotMapGraph:
    """
    Random valid rotation map: half-edges are shuffled and paired, a few are
    left as fixed points (self-loops carrying one label).
    """
    rng = np.random.default_rng(seed)
    slots = rng.permutation(n * D).tolist()
    targets = [-1] * (n * D)
    while slots:
        a = slots.pop()
        if not slots or rng.random() < fixed_point_rate:
            targets[a] = a
            continue
        b = slots.pop()
        targets[a], targets[b] = b, a
    return RotMapGraph(n=n, D=D, targets=targets)


def rotmap_from_graph(graph: nx.Graph) -> RotMapGraph:
    """Rotation map of a d-regular simple graph; labels follow sorted neighbour order."""
    nodes = sorted(graph.nodes())
    index = {v: k for k, v in enumerate(nodes)}
    degrees = {graph.degree(v) for v in nodes}
    if len(degrees) > 1:
        raise PreconditionError(f"graph is not regular (degrees {sorted(degrees)})")
    D = degrees.pop() if degrees else 0
    order = {v: sorted(graph.neighbors(v), key=index.get) for v in nodes}
    targets = []
    for v in nodes:
        for w in order[v]:
            targets.append(index[w] * D + order[w].index(v))
    return RotMapGraph(n=len(nodes), D=D, targets=targets)


# =============================================================================
# Validation and adjacency
# =============================================================================


def validate_rotmap(R: RotMapGraph) -> ValidationReport:
    """Totality and involution; the report names the first offending (v, i)."""
    n, D = R.n, R.D
    if len(R.targets) != n * D:
        return ValidationReport.failed(
            [f"expected {n * D} entries, found {len(R.targets)}"], {"size": len(R.targets)}
        )
    size = n * D
    for slot, target in enumerate(R.targets):
        v, i = divmod(slot, D)
        if not 0 <= target < size:
            return ValidationReport.failed(
                [f"rot({v},{i}) undefined or out of range"], {"v": v, "i": i}
            )
        if R.targets[target] != slot:
            w, j = divmod(target, D)
            back = divmod(R.targets[target], D) if 0 <= R.targets[target] < size else None
            return ValidationReport.failed(
                [f"rot({v},{i})=({w},{j}) but rot({w},{j})={back}"], {"v": v, "i": i}
            )
    return ValidationReport.passed()


def _require_valid(R: RotMapGraph) -> None:
    report = validate_rotmap(R)
    if not report.ok:
        raise InvalidRotmap(report.violations[0])


def label_counts(R: RotMapGraph) -> np.ndarray:
    """Integer matrix C[u, v] = |{i : rot(u, i) lands on v}|."""
    counts = np.zeros((R.n, R.n), dtype=np.int64)
    D = R.D
    for slot, target in enumerate(R.targets):
        counts[slot // D, target // D] += 1
    return counts


def normalized_adjacency(R: RotMapGraph) -> np.ndarray:
    """M[u, v] = label count / D. Rows sum to 1."""
    _require_valid(R)
    if R.D == 0:
        raise PreconditionError("normalized adjacency of a 0-regular graph is undefined")
    return label_counts(R).astype(float) / R.D


# =============================================================================
# Spectra
# =============================================================================


def jacobi_eigenvalues(M: np.ndarray, *, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """
    Cyclic Jacobi rotations on a dense symmetric matrix.

    Stops when the off-diagonal Frobenius norm drops below tol. Returns
    eigenvalues in descending order.
    """
    A = np.array(M, dtype=float, copy=True)
    n = A.shape[0]
    if n <= 1:
        return np.diag(A).copy()

    for _sweep in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(A * A) - np.sum(np.diag(A) ** 2)), 0.0))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
    else:
        logger.warning(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")

    return np.sort(np.diag(A))[::-1]


def spectrum_of_matrix(M: np.ndarray, *, method: str = "auto") -> Spectrum:
    settings = get_settings()
    n = M.shape[0]
    if n == 0:
        raise PreconditionError("spectrum of the empty graph")
    if n > settings.dense_cap:
        raise CapExceeded(f"{n} vertices exceed the dense spectrum cap {settings.dense_cap}")

    if method == "jacobi" or (method == "auto" and n <= settings.jacobi_max):
        values = jacobi_eigenvalues(M, tol=settings.jacobi_tol)
    else:
        values = np.sort(np.linalg.eigvalsh(M))[::-1]

    eigenvalues = [float(x) for x in values]
    lam = max(abs(eigenvalues[1]), abs(eigenvalues[-1])) if n > 1 else 0.0
    return Spectrum(eigenvalues=eigenvalues, lam=lam)


def spectrum(R: RotMapGraph, *, method: str = "auto") -> Spectrum:
    """Eigenvalues of normalized_adjacency(R); λ = 0 for a single vertex."""
    if R.n == 0:
        raise PreconditionError("spectrum of the empty graph")
    logger.info(f"Spectrum of rotmap n={R.n} D={R.D}")
    return spectrum_of_matrix(normalized_adjacency(R), method=method)


def component_lambdas(R: RotMapGraph) -> list[float]:
    """λ of the induced normalized adjacency on every connected component."""
    M = normalized_adjacency(R)
    graph = _multigraph_view(R)
    out = []
    for comp in nx.connected_components(graph):
        idx = sorted(comp)
        out.append(spectrum_of_matrix(M[np.ix_(idx, idx)]).lam)
    return out


def _multigraph_view(R: RotMapGraph) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(R.n))
    D = R.D
    for slot, target in enumerate(R.targets):
        graph.add_edge(slot // D, target // D)
    return graph


def connectivity_flags(R: RotMapGraph, *, cross_check: bool = True) -> tuple[bool, bool]:
    """(connected, bipartite) by traversal; optionally checked against the spectrum."""
    _require_valid(R)
    if R.n == 0:
        raise PreconditionError("connectivity of the empty graph")
    graph = _multigraph_view(R)
    connected = nx.is_connected(graph)
    bipartite = nx.is_bipartite(graph)

    if cross_check and R.D > 0 and R.n <= get_settings().dense_cap:
        eig = spectrum(R).eigenvalues
        spectral_connected = R.n == 1 or eig[1] < 1.0 - SPECTRAL_FLAG_TOL
        if spectral_connected != connected:
            raise ConsistencyError(f"traversal says connected={connected}, spectrum disagrees")
        if connected:
            spectral_bipartite = eig[-1] < -1.0 + SPECTRAL_FLAG_TOL
            if spectral_bipartite != bipartite:
                raise ConsistencyError(
                    f"2-colouring says bipartite={bipartite}, spectrum disagrees"
                )
    return connected, bipartite


# =============================================================================
# Products
# =============================================================================


def square(R: RotMapGraph) -> RotMapGraph:
    """ROT_{G^2}(u, (k1, k2)) = (w, (l2, l1)) for the two-step walk u -k1-> v -k2-> w."""
    _require_valid(R)
    n, D = R.n, R.D
    D2 = D * D
    t = R.targets
    targets = [0] * (n * D2)
    for u in range(n):
        for k1 in range(D):
            v, l1 = divmod(t[u * D + k1], D)
            for k2 in range(D):
                w, l2 = divmod(t[v * D + k2], D)
                targets[u * D2 + k1 * D + k2] = w * D2 + l2 * D + l1
    logger.debug(f"Squared rotmap n={n}: degree {D} -> {D2}")
    return RotMapGraph.model_construct(n=n, D=D2, targets=targets)


def zigzag(R1: RotMapGraph, R2: RotMapGraph) -> RotMapGraph:
    """
    G1 ⓩ G2 on V1 x I1 with labels I2 x I2.

    rot((v,k),(i,j)): (k',i') = rot2(k,i); (w,l') = rot1(v,k'); (l,j') = rot2(l',j);
    result ((w,l),(j',i')).
    """
    if R2.n != R1.D:
        raise DimensionMismatch(f"zig-zag needs |V(G2)| = deg(G1), got {R2.n} vs {R1.D}")
    _require_valid(R1)
    _require_valid(R2)
    N1, D1, D2 = R1.n, R1.D, R2.D
    DD = D2 * D2
    t1, t2 = R1.targets, R2.targets
    targets = [0] * (N1 * D1 * DD)
    for v in range(N1):
        for k in range(D1):
            base = (v * D1 + k) * DD
            for i in range(D2):
                kp, ip = divmod(t2[k * D2 + i], D2)
                w, lp = divmod(t1[v * D1 + kp], D1)
                for j in range(D2):
                    l, jp = divmod(t2[lp * D2 + j], D2)
                    targets[base + i * D2 + j] = (w * D1 + l) * DD + jp * D2 + ip
    logger.debug(f"Zig-zag {N1}x{D1} vertices, degree {DD}")
    return RotMapGraph.model_construct(n=N1 * D1, D=DD, targets=targets)


def expansion_bound_g(lam1: float, lam2: float, variant: str = "standard") -> float:
    """
    Zig-zag eigenvalue bound g(λ1, λ2).

    "standard" has λ1² under the root, "linear" has λ1. Both are < λ1 + λ2
    for λ1, λ2 < 1.
    """
    if variant not in ("standard", "linear"):
        raise PreconditionError(f"unknown variant {variant!r}")
    a = 1.0 - lam2 * lam2
    inner = lam1 * lam1 if variant == "standard" else lam1
    return 0.5 * a * lam1 + 0.5 * math.sqrt(a * a * inner + 4.0 * lam2 * lam2)


# =============================================================================
# Expansion
# =============================================================================


def expansion_ratio_bruteforce(R: RotMapGraph) -> Optional[float]:
    """
    h(G) = min |<S, S̄>| / |S| over nonempty S with |S| <= N/2.

    Crossing edges are counted as labels leaving S, so a multi-edge counts
    with its multiplicity and self-loops never cross. None when N = 1.
    """
    _require_valid(R)
    n = R.n
    if not 1 <= n <= EXPANSION_MAX_VERTICES:
        raise CapExceeded(f"exhaustive expansion supports 1..{EXPANSION_MAX_VERTICES} vertices")
    if n == 1:
        return None

    counts = label_counts(R).astype(np.int64)
    best = math.inf
    chunk = 1 << 14
    bits = np.arange(n, dtype=np.int64)
    for start in range(1, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        member = ((masks[:, None] >> bits[None, :]) & 1).astype(np.int64)
        sizes = member.sum(axis=1)
        keep = sizes <= n // 2
        if not keep.any():
            continue
        member, sizes = member[keep], sizes[keep]
        crossing = ((member @ counts) * (1 - member)).sum(axis=1)
        best = min(best, float(np.min(crossing / sizes)))
    logger.info(f"Expansion ratio over 2^{n} subsets: h={best}")
    return best


def cheeger_check(R: RotMapGraph) -> CheegerReport:
    """h(G) >= D(1 - λ)/2, both sides computed."""
    h = expansion_ratio_bruteforce(R)
    lam = spectrum(R).lam
    bound = R.D * (1.0 - lam) / 2.0
    satisfied = True if h is None else h >= bound - 1e-9
    if not satisfied:
        logger.warning(f"Cheeger inequality violated: h={h} < {bound}")
    return CheegerReport(h=h, bound=bound, satisfied=satisfied)


# =============================================================================
# The iterated family
# =============================================================================


def iterated_family(
    H: RotMapGraph, m_max: int, *, check_spectrum: bool = True
) -> list[RotMapGraph]:
    """
    [G_1, ..., G_{m_max}] with G_1 = H^2 and G_m = G_{m-1}^2 ⓩ H.

    H must be D-regular on D^4 vertices. Sizes and degrees are checked for
    every level; when λ(H) <= 1/4 the bound λ(G_m) <= 1/2 is checked too.
    """
    D = H.D
    if D < 2 or H.n != D**4:
        raise DimensionMismatch(f"H must be D-regular on D^4 vertices, got n={H.n}, D={D}")
    if m_max < 1:
        raise PreconditionError("m_max must be at least 1")
    _require_valid(H)

    certified = False
    if check_spectrum:
        lam_h = spectrum(H).lam
        certified = lam_h <= 0.25
        if not certified:
            logger.info(f"λ(H)={lam_h:.4f} > 1/4: spectral clause not checked")

    cap = get_settings().cap_vertices
    family = [square(H)]
    for m in range(2, m_max + 1):
        if D ** (4 * m) > cap:
            raise CapExceeded(f"G_{m} has {D ** (4 * m)} vertices (cap {cap})")
        family.append(zigzag(square(family[-1]), H))

    for m, G in enumerate(family, start=1):
        if G.n != D ** (4 * m) or G.D != D * D:
            raise ConsistencyError(f"G_{m} has n={G.n}, D={G.D}")
        if certified and G.n <= get_settings().dense_cap:
            lam = spectrum(G).lam
            if lam > 0.5 + 1e-9:
                raise ConsistencyError(f"λ(G_{m}) = {lam} exceeds 1/2")
    logger.info(f"Built expander family up to m={m_max} (D={D})")
    return family


def disjoint_rotmaps(parts: list[RotMapGraph]) -> RotMapGraph:
    """Disjoint union of rotation maps with equal degree."""
    degrees = {p.D for p in parts}
    if len(degrees) != 1:
        raise DimensionMismatch(f"degrees differ: {sorted(degrees)}")
    D = degrees.pop()
    targets: list[int] = []
    offset = 0
    for p in parts:
        targets.extend(t + offset * D for t in p.targets)
        offset += p.n
    return RotMapGraph(n=offset, D=D, targets=targets)


def rotmaps_equal(a: RotMapGraph, b: RotMapGraph) -> bool:
    return a.n == b.n and a.D == b.D and list(a.targets) == list(b.targets)
