"""
Flat text formats.

rotmap     `rotmap <n> <D>` then n·D lines `<v> <i> <w> <j>`
structure  `structure <n>`, `rel <name> <arity>`, `tuple <name> <e1> ... <ek>`
graph      `graph <n>`, `edge <u> <v>` (loads as symmetric irreflexive E)
ball       a structure or graph plus `center <v>` and optionally `radius <r>`
marked     `marked <n>`, `mark <v> full|semifull|partial`, `edge <u> <v>`;
           families are marked graphs separated by `---`
levels     `<element> <level>` per line
corr       `elem <a> cycle <v1> ... <vd>` per line

Blank lines and `#` comments are ignored everywhere. All ids are 0-based.
"""

import logging
from pathlib import Path
from typing import Iterator, Union

import networkx as nx

from zigzag_proptest.errors import FormatError
from zigzag_proptest.models import (
    MARKS,
    Ball,
    MarkedGraph,
    RelationSymbol,
    RotMapGraph,
    Signature,
    Structure,
)
from zigzag_proptest.structures import gaifman, graph_structure, r_ball

logger = logging.getLogger(__name__)

Source = Union[str, Path]


def _read(source: Source) -> tuple[str, str]:
    """(text, name) for a path or literal text."""
    if isinstance(source, Path) or ("\n" not in source and Path(source).exists()):
        path = Path(source)
        return path.read_text(), str(path)
    return str(source), "<input>"


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _int(token: str, lineno: int, source: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"expected an integer, got {token!r}", line=lineno, source=source)


def _header(lines: list, keyword: str, source: str) -> tuple[int, list[str]]:
    if not lines:
        raise FormatError(f"empty input, expected `{keyword}` header", source=source)
    lineno, tokens = lines[0]
    if tokens[0] != keyword:
        raise FormatError(f"expected `{keyword}` header, got {tokens[0]!r}", line=lineno, source=source)
    return lineno, tokens


# =============================================================================
# Rotation maps
# =============================================================================


def parse_rotmap(source: Source) -> RotMapGraph:
    text, name = _read(source)
    lines = list(_lines(text))
    lineno, tokens = _header(lines, "rotmap", name)
    if len(tokens) != 3:
        raise FormatError("header is `rotmap <n> <D>`", line=lineno, source=name)
    n, D = _int(tokens[1], lineno, name), _int(tokens[2], lineno, name)

    targets = [-1] * (n * D)
    for lineno, tokens in lines[1:]:
        if len(tokens) != 4:
            raise FormatError("expected `<v> <i> <w> <j>`", line=lineno, source=name)
        v, i, w, j = (_int(t, lineno, name) for t in tokens)
        if not (0 <= v < n and 0 <= w < n and 0 <= i < D and 0 <= j < D):
            raise FormatError(f"entry {tokens} outside {n} vertices x {D} labels", line=lineno, source=name)
        if targets[v * D + i] != -1:
            raise FormatError(f"duplicate key ({v},{i})", line=lineno, source=name)
        targets[v * D + i] = w * D + j
    if len(lines) - 1 != n * D:
        raise FormatError(f"expected {n * D} entries, found {len(lines) - 1}", source=name)
    logger.debug(f"Parsed rotmap n={n} D={D} from {name}")
    return RotMapGraph(n=n, D=D, targets=targets)


def format_rotmap(R: RotMapGraph) -> str:
    out = [f"rotmap {R.n} {R.D}"]
    for v in range(R.n):
        for i in range(R.D):
            w, j = R.rot(v, i)
            out.append(f"{v} {i} {w} {j}")
    return "\n".join(out) + "\n"


# =============================================================================
# Structures and graphs
# =============================================================================


def parse_structure(source: Source) -> Structure:
    """Reads either the structure format or the graph format."""
    text, name = _read(source)
    lines = list(_lines(text))
    if lines and lines[0][1][0] == "graph":
        return graph_structure(parse_graph(text))
    return _parse_structure_lines(lines, name)


def _parse_structure_lines(lines, name: str) -> Structure:
    lineno, tokens = _header(lines, "structure", name)
    if len(tokens) != 2:
        raise FormatError("header is `structure <n>`", line=lineno, source=name)
    n = _int(tokens[1], lineno, name)

    relations: list[RelationSymbol] = []
    arities: dict[str, int] = {}
    tuples: dict[str, set] = {}
    for lineno, tokens in lines[1:]:
        head = tokens[0]
        if head == "rel":
            if len(tokens) != 3:
                raise FormatError("expected `rel <name> <arity>`", line=lineno, source=name)
            rel, arity = tokens[1], _int(tokens[2], lineno, name)
            if rel in arities:
                raise FormatError(f"relation {rel!r} declared twice", line=lineno, source=name)
            if not 1 <= arity <= 4:
                raise FormatError(f"arity {arity} outside 1..4", line=lineno, source=name)
            arities[rel] = arity
            relations.append(RelationSymbol(name=rel, arity=arity))
            tuples[rel] = set()
        elif head == "tuple":
            if len(tokens) < 2 or tokens[1] not in arities:
                raise FormatError("tuple of an undeclared relation", line=lineno, source=name)
            rel = tokens[1]
            entries = tuple(_int(t, lineno, name) for t in tokens[2:])
            if len(entries) != arities[rel]:
                raise FormatError(f"{rel} has arity {arities[rel]}", line=lineno, source=name)
            if any(not 0 <= e < n for e in entries):
                raise FormatError(f"tuple {entries} leaves universe of size {n}", line=lineno, source=name)
            tuples[rel].add(entries)
        else:
            raise FormatError(f"unknown keyword {head!r}", line=lineno, source=name)

    sig = Signature(relations=relations)
    return Structure.build(sig, n, tuples)


def format_structure(A: Structure) -> str:
    out = [f"structure {A.n}"]
    out.extend(f"rel {rel.name} {rel.arity}" for rel in A.sig.relations)
    for rel in A.sig.names:
        for t in sorted(A.rel(rel)):
            out.append(f"tuple {rel} " + " ".join(str(e) for e in t))
    return "\n".join(out) + "\n"


def parse_graph(source: Source) -> nx.Graph:
    text, name = _read(source)
    lines = list(_lines(text))
    lineno, tokens = _header(lines, "graph", name)
    if len(tokens) != 2:
        raise FormatError("header is `graph <n>`", line=lineno, source=name)
    n = _int(tokens[1], lineno, name)
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for lineno, tokens in lines[1:]:
        if tokens[0] != "edge" or len(tokens) != 3:
            raise FormatError("expected `edge <u> <v>`", line=lineno, source=name)
        u, v = _int(tokens[1], lineno, name), _int(tokens[2], lineno, name)
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise FormatError(f"bad edge ({u},{v})", line=lineno, source=name)
        graph.add_edge(u, v)
    return graph


def format_graph(graph: nx.Graph) -> str:
    nodes = sorted(graph.nodes())
    index = {v: k for k, v in enumerate(nodes)}
    out = [f"graph {len(nodes)}"]
    edges = sorted(tuple(sorted((index[u], index[v]))) for u, v in graph.edges())
    out.extend(f"edge {u} {v}" for u, v in edges)
    return "\n".join(out) + "\n"


# =============================================================================
# Balls
# =============================================================================


def parse_ball(source: Source) -> Ball:
    """
    A structure (or graph) with a `center` line. Without a `radius` line the
    radius is the eccentricity of the center. The ball is re-extracted so
    its element order and distances are canonical.
    """
    text, name = _read(source)
    lines = list(_lines(text))
    center_lines = [(no, t) for no, t in lines if t[0] == "center"]
    radius_lines = [(no, t) for no, t in lines if t[0] == "radius"]
    body = [(no, t) for no, t in lines if t[0] not in ("center", "radius")]
    if len(center_lines) != 1 or len(center_lines[0][1]) != 2:
        raise FormatError("ball files need exactly one `center <v>` line", source=name)
    center = _int(center_lines[0][1][1], center_lines[0][0], name)

    if body and body[0][1][0] == "graph":
        rebuilt = "\n".join(" ".join(t) for _, t in body)
        A = graph_structure(parse_graph(rebuilt))
    else:
        A = _parse_structure_lines(body, name)
    if not 0 <= center < A.n:
        raise FormatError(f"center {center} outside universe", line=center_lines[0][0], source=name)

    if radius_lines:
        radius = _int(radius_lines[0][1][1], radius_lines[0][0], name)
    else:
        radius = max(nx.single_source_shortest_path_length(gaifman(A), center).values())
    return r_ball(A, center, radius)


def format_ball(ball: Ball) -> str:
    return format_structure(ball.structure) + f"center {ball.center}\nradius {ball.radius}\n"


# =============================================================================
# Marked graphs
# =============================================================================


def _parse_marked_block(lines, name: str) -> MarkedGraph:
    lineno, tokens = _header(lines, "marked", name)
    n = _int(tokens[1], lineno, name) if len(tokens) == 2 else -1
    if n < 0:
        raise FormatError("header is `marked <n>`", line=lineno, source=name)
    marks: list = [None] * n
    edges = set()
    for lineno, tokens in lines[1:]:
        if tokens[0] == "mark" and len(tokens) == 3:
            v = _int(tokens[1], lineno, name)
            if not 0 <= v < n or tokens[2] not in MARKS:
                raise FormatError(f"bad mark line {tokens}", line=lineno, source=name)
            marks[v] = tokens[2]
        elif tokens[0] == "edge" and len(tokens) == 3:
            u, v = _int(tokens[1], lineno, name), _int(tokens[2], lineno, name)
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise FormatError(f"bad edge ({u},{v})", line=lineno, source=name)
            edges.add((min(u, v), max(u, v)))
        else:
            raise FormatError(f"unexpected line {tokens}", line=lineno, source=name)
    missing = [v for v, m in enumerate(marks) if m is None]
    if missing:
        raise FormatError(f"vertices without mark: {missing}", source=name)
    return MarkedGraph(n=n, edges=frozenset(edges), marks=tuple(marks))


def parse_marked_family(source: Source) -> list[MarkedGraph]:
    text, name = _read(source)
    blocks: list[list] = [[]]
    for lineno, tokens in _lines(text):
        if tokens == ["---"]:
            blocks.append([])
        else:
            blocks[-1].append((lineno, tokens))
    return [_parse_marked_block(block, name) for block in blocks if block]


def format_marked(F: MarkedGraph) -> str:
    out = [f"marked {F.n}"]
    out.extend(f"mark {v} {m}" for v, m in enumerate(F.marks))
    out.extend(f"edge {u} {v}" for u, v in sorted(F.edges))
    return "\n".join(out) + "\n"


def format_marked_family(family: list[MarkedGraph]) -> str:
    return "---\n".join(format_marked(F) for F in family)


# =============================================================================
# Sidecars
# =============================================================================


def format_levels(levels: list[int]) -> str:
    return "".join(f"{a} {m}\n" for a, m in enumerate(levels))


def parse_levels(source: Source) -> list[int]:
    text, name = _read(source)
    pairs = []
    for lineno, tokens in _lines(text):
        if len(tokens) != 2:
            raise FormatError("expected `<element> <level>`", line=lineno, source=name)
        pairs.append((_int(tokens[0], lineno, name), _int(tokens[1], lineno, name)))
    levels = [0] * len(pairs)
    for a, m in pairs:
        if not 0 <= a < len(pairs):
            raise FormatError(f"element {a} out of range", source=name)
        levels[a] = m
    return levels


def format_correspondence(cycles: dict[int, list[int]]) -> str:
    return "".join(
        f"elem {a} cycle " + " ".join(str(v) for v in cycle) + "\n"
        for a, cycle in sorted(cycles.items())
    )
