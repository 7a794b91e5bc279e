"""
Data types.

Immutable pydantic models for everything that crosses a module boundary.
Builders that produce large objects go through model_construct; the
validators below are for data arriving from users and files.
"""

from typing import Any, Literal, Optional

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

Mark = Literal["full", "semifull", "partial"]
MARKS: tuple[str, ...] = ("full", "semifull", "partial")


class ValidationReport(BaseModel):
    """Outcome of a checker. Violations are data, never exceptions."""

    model_config = ConfigDict(extra="allow", frozen=True)

    ok: bool
    violations: list[str] = []
    witness: Optional[dict[str, Any]] = None  # first offending item

    @classmethod
    def passed(cls) -> "ValidationReport":
        return cls(ok=True)

    @classmethod
    def failed(cls, violations: list[str], witness: Optional[dict[str, Any]] = None):
        return cls(ok=False, violations=violations, witness=witness)


# =============================================================================
# Rotation maps
# =============================================================================


class RotMapGraph(BaseModel):
    """
    D-regular multigraph as a rotation map.

    Vertices are 0..n-1, labels 0..D-1. targets[v*D + i] = w*D + j encodes
    rot(v, i) = (w, j). Totality and involution are checked by
    graphcore.validate_rotmap, not here.
    """

    model_config = ConfigDict(extra="allow", frozen=True)

    n: int = Field(ge=0)
    D: int = Field(ge=0)
    targets: list[int]

    def rot(self, v: int, i: int) -> tuple[int, int]:
        return divmod(self.targets[v * self.D + i], self.D)

    def neighbours(self, v: int) -> list[int]:
        D = self.D
        return [self.targets[v * D + i] // D for i in range(D)]

    @classmethod
    def from_map(cls, n: int, D: int, rot: dict[tuple[int, int], tuple[int, int]]) -> "RotMapGraph":
        """Build from an explicit {(v, i): (w, j)} dict; missing keys become -1."""
        targets = [-1] * (n * D)
        for (v, i), (w, j) in rot.items():
            targets[v * D + i] = w * D + j
        return cls(n=n, D=D, targets=targets)


class Spectrum(BaseModel):
    """Eigenvalues of the normalized adjacency matrix, sorted descending."""

    model_config = ConfigDict(extra="allow", frozen=True)

    eigenvalues: list[float]
    lam: float = Field(ge=0.0)  # max(|λ2|, |λN|); 0 for a single vertex


class CheegerReport(BaseModel):
    model_config = ConfigDict(extra="allow", frozen=True)

    h: Optional[float]  # None when no S with |S| <= N/2 exists
    bound: float
    satisfied: bool


# =============================================================================
# Relational structures
# =============================================================================


class RelationSymbol(BaseModel):
    model_config = ConfigDict(extra="allow", frozen=True)

    name: str = Field(min_length=1)
    arity: int = Field(ge=1, le=4)


class Signature(BaseModel):
    """Ordered list of relation symbols with unique names."""

    model_config = ConfigDict(extra="allow", frozen=True)

    relations: list[RelationSymbol]

    @model_validator(mode="after")
    def _unique_names(self) -> "Signature":
        names = [rel.name for rel in self.relations]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate relation names in signature: {names}")
        return self

    @property
    def names(self) -> list[str]:
        return [rel.name for rel in self.relations]

    def arity(self, name: str) -> int:
        for rel in self.relations:
            if rel.name == name:
                return rel.arity
        raise KeyError(name)

    def same_as(self, other: "Signature") -> bool:
        return [(r.name, r.arity) for r in self.relations] == [
            (r.name, r.arity) for r in other.relations
        ]

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "Signature":
        return cls(relations=[RelationSymbol(name=name, arity=arity) for name, arity in pairs])


GRAPH_SIGNATURE = Signature.of(("E", 2))


class Structure(BaseModel):
    """Finite σ-structure on the universe 0..n-1."""

    model_config = ConfigDict(extra="allow", frozen=True)

    sig: Signature
    n: int = Field(ge=0)
    tuples: dict[str, frozenset[tuple[int, ...]]] = {}

    @model_validator(mode="after")
    def _check_tuples(self) -> "Structure":
        known = set(self.sig.names)
        for name, rel_tuples in self.tuples.items():
            if name not in known:
                raise ValueError(f"relation {name!r} not in signature")
            arity = self.sig.arity(name)
            for t in rel_tuples:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} has wrong arity for {name}/{arity}")
                if any(e < 0 or e >= self.n for e in t):
                    raise ValueError(f"tuple {t} of {name} leaves the universe 0..{self.n - 1}")
        for name in known - set(self.tuples):
            self.tuples[name] = frozenset()
        return self

    def rel(self, name: str) -> frozenset[tuple[int, ...]]:
        return self.tuples.get(name, frozenset())

    def tuple_count(self) -> int:
        return sum(len(ts) for ts in self.tuples.values())

    @classmethod
    def build(cls, sig: Signature, n: int, tuples: dict[str, Any]) -> "Structure":
        """Unchecked constructor for trusted builders."""
        full = {name: frozenset(tuples.get(name, ())) for name in sig.names}
        return cls.model_construct(sig=sig, n=n, tuples=full)


class Ball(BaseModel):
    """
    Rooted r-ball. The center is re-indexed to 0; distances[v] is the
    Gaifman distance of v from the center inside the original structure.
    """

    model_config = ConfigDict(extra="allow", frozen=True)

    structure: Structure
    center: int = Field(ge=0)
    radius: int = Field(ge=0)
    distances: list[int] = []


class TypeRegistry(BaseModel):
    """Representatives of the r-types discovered so far (discovery order)."""

    model_config = ConfigDict(extra="allow")

    radius: int = Field(ge=0)
    representatives: list[Ball] = []
    _buckets: dict = PrivateAttr(default_factory=dict)  # invariant key -> type indices

    def __len__(self) -> int:
        return len(self.representatives)


class Interval(BaseModel):
    """[lo, hi] with hi=None meaning [lo, ∞)."""

    model_config = ConfigDict(extra="allow", frozen=True)

    lo: int = Field(default=0, ge=0)
    hi: Optional[int] = None

    @model_validator(mode="after")
    def _ordered(self) -> "Interval":
        if self.hi is not None and self.hi < self.lo:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        return self

    def __contains__(self, count: int) -> bool:
        return count >= self.lo and (self.hi is None or count <= self.hi)

    def __str__(self) -> str:
        return f"[{self.lo},{'inf' if self.hi is None else self.hi}]"


class NeighbourhoodProfile(BaseModel):
    """Per-type count intervals over a registry, plus a default interval."""

    model_config = ConfigDict(extra="allow")

    radius: int = Field(ge=0)
    registry: TypeRegistry
    intervals: dict[int, Interval] = {}
    default: Interval = Interval(lo=0, hi=0)

    @model_validator(mode="after")
    def _radius_matches(self) -> "NeighbourhoodProfile":
        if self.registry.radius != self.radius:
            raise ValueError("profile radius differs from its registry radius")
        return self

    @property
    def is_zero_profile(self) -> bool:
        return self.default.lo == 0 and all(iv.lo == 0 for iv in self.intervals.values())


class SamplingDistance(BaseModel):
    model_config = ConfigDict(extra="allow", frozen=True)

    value: float = Field(ge=0.0)
    tail_bound: float = Field(ge=0.0)
    r_max: int = Field(ge=0)
    terms: list[float] = []


# =============================================================================
# Models of the zig-zag formula and the reduction
# =============================================================================


class ZigzagModel(BaseModel):
    """
    Tree of zig-zag levels. Elements are numbered level by level; inside a
    level by G_m vertex id, so level_bijection is the identity offset.
    """

    model_config = ConfigDict(extra="allow", frozen=True)

    structure: Structure
    D: int = Field(ge=2)
    depth: int = Field(ge=1)
    H: RotMapGraph
    level_offsets: list[int]  # first element id of each level 0..depth

    def level_of(self, a: int) -> int:
        for m in range(self.depth, -1, -1):
            if a >= self.level_offsets[m]:
                return m
        raise IndexError(a)

    def tree_parent(self, a: int) -> Optional[int]:
        m = self.level_of(a)
        if m == 0:
            return None
        local = a - self.level_offsets[m]
        return self.level_offsets[m - 1] + local // self.D**4

    def level_bijection(self, m: int) -> dict[int, int]:
        """Level-m element -> vertex of G_m."""
        start = self.level_offsets[m]
        return {start + v: v for v in range(self.D ** (4 * m))}

    def level_elements(self, m: int) -> range:
        return range(self.level_offsets[m], self.level_offsets[m] + self.D ** (4 * m))


class ExpansionReport(BaseModel):
    """Measured expansion of an underlying graph."""

    model_config = ConfigDict(extra="allow", frozen=True)

    lam: float = Field(ge=0.0)
    spectral_bound: float  # D_U(1 - λ)/2
    h: Optional[float] = None  # exact, only at toy sizes
    asserted: bool = False  # the D²/12 lower bound was checked


class FarnessBound(BaseModel):
    model_config = ConfigDict(extra="allow", frozen=True)

    value: float = Field(ge=0.0)
    certified: bool  # False: spectral surrogate, no guarantee


class Gadget(BaseModel):
    """
    A building block or arrow gadget. Nodes are 0..size-1 in block order;
    ends are the vertices left at degree 2 (one for H4, loops, non-arrows).
    """

    model_config = ConfigDict(extra="allow", frozen=True, arbitrary_types_allowed=True)

    kind: str
    graph: nx.Graph
    ends: tuple[int, ...]
    k: Optional[int] = None  # relation index for arrows and loops


class ReducedGraph(BaseModel):
    """3-regular image of a structure plus the element-cycle correspondence."""

    model_config = ConfigDict(extra="allow", frozen=True, arbitrary_types_allowed=True)

    graph: nx.Graph
    d: int = Field(ge=1)
    ell: int = Field(ge=1)
    cycles: dict[int, list[int]]  # element -> u_{a,1..d}


# =============================================================================
# GSF and testers
# =============================================================================


class MarkedGraph(BaseModel):
    """Simple graph on 0..n-1 with a full/semifull/partial mark per vertex."""

    model_config = ConfigDict(extra="allow", frozen=True)

    n: int = Field(ge=0)
    edges: frozenset[tuple[int, int]] = frozenset()
    marks: tuple[Mark, ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "MarkedGraph":
        if len(self.marks) != self.n:
            raise ValueError(f"{len(self.marks)} marks for {self.n} vertices")
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n) or u > v:
                raise ValueError(f"edge {(u, v)} must be (low, high) inside 0..{self.n - 1}")
        return self

    def to_nx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @classmethod
    def of(cls, n: int, edges, marks) -> "MarkedGraph":
        norm = frozenset((min(u, v), max(u, v)) for u, v in edges)
        if isinstance(marks, str):
            marks = (marks,) * n
        return cls(n=n, edges=norm, marks=tuple(marks))


class TesterVerdict(BaseModel):
    model_config = ConfigDict(extra="allow", frozen=True)

    accept: bool
    queries: int = Field(ge=0)
    cause: Optional[Literal["M", "forbidden", "exact"]] = None
    samples: int = Field(default=0, ge=0)
    distribution: dict[int, float] = {}  # type index -> empirical frequency
