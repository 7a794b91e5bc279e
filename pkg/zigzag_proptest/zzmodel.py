"""
Models of the zig-zag formula.

A model is a D^4-ary complete rooted tree whose level m carries the
expander G_m as E-coloured edges. Elements are numbered level by level;
the child of local element x via F_k is local element x*D^4 + k one level
down, which is exactly the zig-zag vertex (x, k).

The validators below are direct checkers for the four conjuncts of the
formula. They are the ground truth; foeval can cross-check them on small
models.
"""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Optional, Union

import numpy as np

from zigzag_proptest.config import get_settings
from zigzag_proptest.errors import (
    CapExceeded,
    ConsistencyError,
    DimensionMismatch,
    InvalidRotmap,
    PreconditionError,
)
from zigzag_proptest.foeval import e_name, f_name, l_name, sigma
from zigzag_proptest.formats import format_levels
from zigzag_proptest.graphcore import (
    _require_valid,
    expansion_ratio_bruteforce,
    iterated_family,
    rotmaps_equal,
    spectrum,
    square,
)
from zigzag_proptest.models import (
    ExpansionReport,
    FarnessBound,
    NeighbourhoodProfile,
    RotMapGraph,
    Structure,
    ValidationReport,
    ZigzagModel,
)
from zigzag_proptest.structures import (
    StructureIndex,
    disjoint_copies,
    element_types,
    new_registry,
    r_ball,
    root_profiles,
)

logger = logging.getLogger(__name__)

PROFILE_RADIUS = 2


def model_degree(D: int) -> int:
    """d = 2D² + D⁴ + 1."""
    return 2 * D * D + D**4 + 1


def universe_size(D: int, depth: int) -> int:
    return sum(D ** (4 * m) for m in range(depth + 1))


# =============================================================================
# Builder
# =============================================================================


def build_model(
    H: RotMapGraph, depth: int, *, cap: Optional[int] = None, check: bool = True
) -> ZigzagModel:
    """
    The model of depth n over H.

    Level 1 realizes G_1 = H^2, level m realizes G_m = G_{m-1}^2 ⓩ H. The root
    carries R(r, r) and the diagonal fixed points E_{i,i}(r, r); leaves carry
    every L_k(x, x).
    """
    D = H.D
    if D < 2 or H.n != D**4:
        raise DimensionMismatch(f"H must be D-regular on D^4 vertices, got n={H.n}, D={D}")
    if depth < 1:
        raise PreconditionError("depth must be at least 1")
    cap = cap if cap is not None else get_settings().cap_vertices
    total = universe_size(D, depth)
    if total > cap:
        raise CapExceeded(f"model of depth {depth} has {total} elements (cap {cap})")

    D2, D4 = D * D, D**4
    family = iterated_family(H, depth, check_spectrum=False)
    offsets = [universe_size(D, m - 1) if m else 0 for m in range(depth + 1)]

    tuples: dict[str, set] = defaultdict(set)
    tuples["R"].add((0, 0))
    for i in range(D2):
        tuples[e_name(i, i)].add((0, 0))

    for m, G in enumerate(family, start=1):
        start, parent_start = offsets[m], offsets[m - 1]
        for v in range(G.n):
            a = start + v
            parent, k = divmod(v, D4)
            tuples[f_name(k)].add((parent_start + parent, a))
            for i in range(D2):
                w, j = G.rot(v, i)
                tuples[e_name(i, j)].add((a, start + w))

    for a in range(offsets[depth], total):
        for k in range(D4):
            tuples[l_name(k)].add((a, a))

    model = ZigzagModel(
        structure=Structure.build(sigma(D), total, tuples),
        D=D,
        depth=depth,
        H=H,
        level_offsets=offsets,
    )
    logger.info(f"Built zig-zag model D={D} depth={depth}: {total} elements")

    if check:
        for m, G in enumerate(family, start=1):
            if not rotmaps_equal(level_rotmap(model, m), G):
                raise ConsistencyError(f"level {m} does not reproduce G_{m}")
        for name, report in validate_model(model.structure, D, H).items():
            if not report.ok:
                raise ConsistencyError(f"built model fails {name}: {report.violations[0]}")
    return model


def level_rotmap(M: ZigzagModel, m: int) -> RotMapGraph:
    """E-labels restricted to level m, carried to V(G_m) by the level bijection."""
    if not 1 <= m <= M.depth:
        raise PreconditionError(f"level {m} outside 1..{M.depth}")
    D2 = M.D * M.D
    beta = M.level_bijection(m)
    targets = [-1] * (len(beta) * D2)
    for i in range(D2):
        for j in range(D2):
            for a, b in M.structure.rel(e_name(i, j)):
                if a in beta and b in beta:
                    targets[beta[a] * D2 + i] = beta[b] * D2 + j
    return RotMapGraph(n=len(beta), D=D2, targets=targets)


def levels(M: ZigzagModel) -> list[int]:
    return [M.level_of(a) for a in range(M.structure.n)]


def write_levels(M: ZigzagModel, path: Union[str, Path]) -> None:
    """Sidecar file with one `<element> <level>` line per element."""
    Path(path).write_text(format_levels(levels(M)))


def slot_degree(A: Structure, a: int, *, index: Optional[StructureIndex] = None) -> int:
    """
    Labels used at a: E-tuples count once per position a occupies, every
    other tuple once. Equals d for every element of a built model.
    """
    index = index if index is not None else StructureIndex(A)
    return sum(t.count(a) if name.startswith("E_") else 1 for name, t in index.incidence[a])


# =============================================================================
# Validators
# =============================================================================


class _View:
    """σ(D) relations split by kind, indexed per element."""

    def __init__(self, A: Structure, D: int):
        if not A.sig.same_as(sigma(D)):
            raise DimensionMismatch(f"structure is not over σ({D})")
        self.n = A.n
        self.D2, self.D4 = D * D, D**4
        self.parents: list[set[int]] = [set() for _ in range(A.n)]
        self.children: list[dict[int, set[int]]] = [defaultdict(set) for _ in range(A.n)]
        self.child_kinds: dict[tuple[int, int], set[int]] = defaultdict(set)
        self.l_self: list[set[int]] = [set() for _ in range(A.n)]
        self.l_touch = [False] * A.n  # some L tuple between a and another element
        self.r_touch: list[set[int]] = [set() for _ in range(A.n)]
        self.e_out: list[list[tuple[int, int, int]]] = [[] for _ in range(A.n)]
        self.e_set: set[tuple[int, int, int, int]] = set()

        for k in range(self.D4):
            for x, y in A.rel(f_name(k)):
                self.parents[y].add(x)
                self.children[x][k].add(y)
                self.child_kinds[(x, y)].add(k)
            for x, y in A.rel(l_name(k)):
                if x == y:
                    self.l_self[x].add(k)
                else:
                    self.l_touch[x] = self.l_touch[y] = True
        for x, y in A.rel("R"):
            self.r_touch[x].add(y)
            self.r_touch[y].add(x)
        for i in range(self.D2):
            for j in range(self.D2):
                for x, y in A.rel(e_name(i, j)):
                    self.e_out[x].append((i, j, y))
                    self.e_set.add((x, y, i, j))

    def is_root(self, a: int) -> bool:
        return not self.parents[a]

    def has_children(self, a: int) -> bool:
        return bool(self.children[a])


def validate_tree(A: Structure, D: int) -> ValidationReport:
    """At most one root, unique parents, R/L bookkeeping, all-or-nothing children."""
    view = _View(A, D)
    roots = [a for a in range(view.n) if view.is_root(a)]
    if len(roots) > 1:
        return ValidationReport.failed(
            [f"{len(roots)} elements without a parent: {roots[:5]}"], {"roots": roots[:5]}
        )

    for a in range(view.n):
        if view.is_root(a):
            if a not in view.r_touch[a]:
                return ValidationReport.failed([f"root {a} lacks R({a},{a})"], {"a": a})
        else:
            if len(view.parents[a]) != 1:
                return ValidationReport.failed(
                    [f"element {a} has {len(view.parents[a])} parents"], {"a": a}
                )
            if view.r_touch[a]:
                return ValidationReport.failed([f"non-root {a} occurs in R"], {"a": a})

        if not view.has_children(a):
            if len(view.l_self[a]) != view.D4 or view.l_touch[a]:
                return ValidationReport.failed(
                    [f"leaf {a} carries {len(view.l_self[a])} of {view.D4} L self-tuples"],
                    {"a": a},
                )
            continue
        if view.l_self[a] or view.l_touch[a]:
            return ValidationReport.failed([f"inner element {a} occurs in L"], {"a": a})
        for k in range(view.D4):
            kids = view.children[a].get(k, set())
            if len(kids) != 1:
                return ValidationReport.failed(
                    [f"element {a} has {len(kids)} F_{k}-children"], {"a": a, "k": k}
                )
            (child,) = kids
            if child == a or view.child_kinds[(a, child)] != {k}:
                return ValidationReport.failed(
                    [f"F_{k}-child {child} of {a} is degenerate"], {"a": a, "k": k}
                )
    return ValidationReport.passed()


def validate_rotation_map(A: Structure, D: int) -> ValidationReport:
    """E encodes a self-inverse rotation map with labels [D²]."""
    view = _View(A, D)
    for a in range(view.n):
        by_label: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for i, j, b in view.e_out[a]:
            by_label[i].append((j, b))
        for i in range(view.D2):
            if len(by_label.get(i, [])) != 1:
                return ValidationReport.failed(
                    [f"rot({a},{i}) has {len(by_label.get(i, []))} values"], {"a": a, "i": i}
                )
    for a in range(view.n):
        for i, j, b in view.e_out[a]:
            if (b, a, j, i) not in view.e_set:
                return ValidationReport.failed(
                    [f"E_{i}_{j}({a},{b}) without E_{j}_{i}({b},{a})"], {"a": a, "i": i}
                )
    return ValidationReport.passed()


def validate_base(A: Structure, D: int, rot_H2: RotMapGraph) -> ValidationReport:
    """The root carries the diagonal E fixed points only; its children realize ROT_{H^2}."""
    D2, D4 = D * D, D**4
    if rot_H2.n != D4 or rot_H2.D != D2:
        raise DimensionMismatch(f"H^2 must have {D4} vertices and degree {D2}")
    view = _View(A, D)
    for r in range(view.n):
        if not view.is_root(r):
            continue
        for i in range(D2):
            if (r, r, i, i) not in view.e_set:
                return ValidationReport.failed([f"root {r} lacks E_{i}_{i}({r},{r})"], {"a": r})
        for i, j, b in view.e_out[r]:
            if b != r:
                return ValidationReport.failed([f"root {r} has E-edge to {b}"], {"a": r})
        if any(r in {b for _, _, b in view.e_out[x]} for x in range(view.n) if x != r):
            return ValidationReport.failed([f"root {r} has an incoming E-edge"], {"a": r})
        for k in range(D4):
            for i in range(D2):
                kp, ip = rot_H2.rot(k, i)
                found = any(
                    (y, y2, i, ip) in view.e_set
                    for y in view.children[r].get(k, ())
                    for y2 in view.children[r].get(kp, ())
                )
                if not found:
                    return ValidationReport.failed(
                        [f"children of root {r} miss ROT_H2({k},{i}) = ({kp},{ip})"],
                        {"a": r, "k": k, "i": i},
                    )
    return ValidationReport.passed()


def validate_recursion(A: Structure, D: int, rot_H: RotMapGraph) -> ValidationReport:
    """
    Every length-2 E-path x -(k1,l1)- y -(k2,l2)- z between non-root elements,
    not both leaves, has the zig-zag edges of G^2 ⓩ H between their children.
    """
    D2, D4 = D * D, D**4
    if rot_H.n != D4 or rot_H.D != D:
        raise DimensionMismatch(f"H must have {D4} vertices and degree {D}")
    view = _View(A, D)
    for x in range(view.n):
        if view.is_root(x):
            continue
        for k1, l1, y in view.e_out[x]:
            for k2, l2, z in view.e_out[y]:
                if view.is_root(z):
                    continue
                if not view.has_children(x) and not view.has_children(z):
                    continue
                kp, lp = k1 * D2 + k2, l2 * D2 + l1
                for ip in range(D):
                    k, i = rot_H.rot(kp, ip)
                    for j in range(D):
                        l, jp = rot_H.rot(lp, j)
                        label, back = i * D + j, jp * D + ip
                        found = any(
                            (xc, zc, label, back) in view.e_set
                            for xc in view.children[x].get(k, ())
                            for zc in view.children[z].get(l, ())
                        )
                        if not found:
                            return ValidationReport.failed(
                                [f"path {x}-{y}-{z} misses child edge E_{label}_{back}"],
                                {"x": x, "y": y, "z": z, "label": label},
                            )
    return ValidationReport.passed()


def validate_model(A: Structure, D: int, H: RotMapGraph) -> dict[str, ValidationReport]:
    """All four validators, keyed by conjunct name."""
    rot_H2 = square(H)
    return {
        "tree": validate_tree(A, D),
        "rotation_map": validate_rotation_map(A, D),
        "base": validate_base(A, D, rot_H2),
        "recursion": validate_recursion(A, D, H),
    }


# =============================================================================
# Underlying graph and expansion
# =============================================================================


def underlying_graph(M: ZigzagModel, *, strict: bool = True) -> RotMapGraph:
    """
    U(A) with labels 0 (parent or R), 1..D^4 (child F_k or L_k fixed point)
    and D^4+1..D^4+D² (E-labels). (D²+D⁴+1)-regular for a valid model.

    strict=False turns undefined labels into fixed points, which lets
    mutated models through.
    """
    A, D = M.structure, M.D
    D2, D4 = D * D, D**4
    DU = 1 + D4 + D2
    targets = [-1] * (A.n * DU)

    def put(v: int, i: int, w: int, j: int) -> None:
        slot = v * DU + i
        if targets[slot] != -1 and strict:
            raise InvalidRotmap(f"label {i} at element {v} defined twice")
        targets[slot] = w * DU + j

    for v, w in A.rel("R"):
        if v == w:
            put(v, 0, v, 0)
    for k in range(D4):
        for v, w in A.rel(f_name(k)):
            put(v, 1 + k, w, 0)
            put(w, 0, v, 1 + k)
        for v, w in A.rel(l_name(k)):
            if v == w:
                put(v, 1 + k, v, 1 + k)
    for i in range(D2):
        for j in range(D2):
            for v, w in A.rel(e_name(i, j)):
                put(v, 1 + D4 + i, w, 1 + D4 + j)

    missing = [slot for slot, t in enumerate(targets) if t == -1]
    if missing:
        if strict:
            v, i = divmod(missing[0], DU)
            raise InvalidRotmap(f"label {i} at element {v} undefined")
        logger.warning(f"Underlying graph: {len(missing)} undefined labels padded as fixed points")
        for slot in missing:
            targets[slot] = slot

    U = RotMapGraph(n=A.n, D=DU, targets=targets)
    _require_valid(U)
    return U


def measured_expansion(M: ZigzagModel) -> ExpansionReport:
    """
    Spectral bound D_U(1-λ)/2 on U(A) and, up to 20 elements, the exact h.

    The D²/12 lower bound is asserted only when λ(H) <= 1/4.
    """
    U = underlying_graph(M, strict=False)
    lam = spectrum(U).lam
    bound = U.D * (1.0 - lam) / 2.0
    h = expansion_ratio_bruteforce(U) if U.n <= 20 else None

    asserted = spectrum(M.H).lam <= 0.25
    if asserted:
        measured = h if h is not None else bound
        if measured < M.D * M.D / 12.0 - 1e-9:
            raise ConsistencyError(f"expansion {measured} below D²/12 with λ(H) <= 1/4")
    else:
        logger.info(f"λ(H) > 1/4: expansion {bound:.4f} reported without assertion")
    return ExpansionReport(lam=lam, spectral_bound=max(bound, 0.0), h=h, asserted=asserted)


def nontestability_bound(M: ZigzagModel) -> FarnessBound:
    """
    Farness of any structure of small components from the model: 1/(144D²)
    when λ(H) <= 1/4, otherwise the surrogate h_spectral/(3d), uncertified.
    """
    if spectrum(M.H).lam <= 0.25:
        return FarnessBound(value=1.0 / (144 * M.D * M.D), certified=True)
    report = measured_expansion(M)
    value = report.spectral_bound / (3 * model_degree(M.D))
    logger.warning(f"Farness bound {value:.6f} is a spectral surrogate, not certified")
    return FarnessBound(value=value, certified=False)


# =============================================================================
# Counterexamples and profiles
# =============================================================================


def ball_structure(A: Structure, a: int, r: int) -> Structure:
    """Induced substructure on the r-ball of a, center renumbered to 0."""
    return r_ball(A, a, r).structure


def build_counterexample(M: ZigzagModel, H_small: Structure) -> Structure:
    """⌊n/m⌋ disjoint copies of H_small plus n mod m isolated elements, n = |M|."""
    n, m = M.structure.n, H_small.n
    if m == 0 or m > n:
        raise PreconditionError(f"need 1 <= |H'| <= {n}, got {m}")
    if not H_small.sig.same_as(M.structure.sig):
        raise DimensionMismatch("H' must be over the model's signature")
    copies, rest = divmod(n, m)
    B = disjoint_copies([H_small] * copies, H_small.sig, extra_isolated=rest)
    logger.info(f"Counterexample: {copies} copies of a {m}-element structure + {rest} isolated")
    return B


def build_rho_k(models: list[ZigzagModel]) -> list[NeighbourhoodProfile]:
    """
    One 0-profile of radius 2 per observed root type. The root type gets
    [0,1], every other type seen in models with that root type [0,∞), all
    remaining types the default [0,0]. The profiles share one registry.
    """
    if not models:
        raise PreconditionError("build_rho_k needs at least one model")
    if len({M.D for M in models}) != 1:
        raise DimensionMismatch("models disagree on D")

    reg = new_registry(PROFILE_RADIUS)
    typed = []
    for M in models:
        types = element_types(M.structure, PROFILE_RADIUS, reg)
        typed.append((types[0], types))
    profiles = root_profiles(reg, typed)
    logger.info(f"Built {len(profiles)} root profiles over {len(reg)} 2-types")
    return profiles


# =============================================================================
# Mutations
# =============================================================================


def delete_tuple(A: Structure, rel: str, t: tuple[int, ...]) -> Structure:
    if t not in A.rel(rel):
        raise PreconditionError(f"{t} not in {rel}")
    tuples = dict(A.tuples)
    tuples[rel] = A.rel(rel) - {t}
    return Structure.build(A.sig, A.n, tuples)


def recolour_tuple(A: Structure, rel: str, t: tuple[int, ...], new_rel: str) -> Structure:
    if new_rel == rel or new_rel not in A.sig.names:
        raise PreconditionError(f"cannot recolour {rel} to {new_rel}")
    tuples = dict(delete_tuple(A, rel, t).tuples)
    tuples[new_rel] = A.rel(new_rel) | {t}
    return Structure.build(A.sig, A.n, tuples)


def random_mutation(A: Structure, seed: int = 0) -> tuple[Structure, str]:
    """Delete or recolour one uniformly chosen tuple; returns (mutant, description)."""
    rng = np.random.default_rng(seed)
    pool = [(name, t) for name in A.sig.names for t in sorted(A.rel(name))]
    if not pool:
        raise PreconditionError("no tuple to mutate")
    name, t = pool[int(rng.integers(len(pool)))]
    if rng.random() < 0.5:
        return delete_tuple(A, name, t), f"delete {name}{t}"
    others = [r for r in A.sig.names if r != name and A.sig.arity(r) == len(t) and t not in A.rel(r)]
    if not others:
        return delete_tuple(A, name, t), f"delete {name}{t}"
    new_rel = others[int(rng.integers(len(others)))]
    return recolour_tuple(A, name, t, new_rel), f"recolour {name}{t} -> {new_rel}"
