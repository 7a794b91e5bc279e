"""
First-order formulas with counting quantifiers.

AST as immutable pydantic models, an s-expression reader/printer, a naive
evaluator over finite structures, and generators for the zig-zag formula
family. Counting quantifiers are evaluated by counting witnesses.
"""

import itertools
import logging
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from zigzag_proptest.errors import (
    BudgetExceeded,
    DimensionMismatch,
    FormulaSyntaxError,
    UnboundVariable,
)
from zigzag_proptest.models import RotMapGraph, Signature, Structure

logger = logging.getLogger(__name__)


# =============================================================================
# AST
# =============================================================================


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True)


class Atom(_Node):
    op: Literal["atom"] = "atom"
    rel: str
    args: tuple[str, ...]


class Eq(_Node):
    op: Literal["eq"] = "eq"
    left: str
    right: str


class Not(_Node):
    op: Literal["not"] = "not"
    body: "Formula"


class And(_Node):
    op: Literal["and"] = "and"
    parts: tuple["Formula", ...] = ()


class Or(_Node):
    op: Literal["or"] = "or"
    parts: tuple["Formula", ...] = ()


class Implies(_Node):
    op: Literal["implies"] = "implies"
    left: "Formula"
    right: "Formula"


class Exists(_Node):
    op: Literal["exists"] = "exists"
    var: str
    body: "Formula"


class Forall(_Node):
    op: Literal["forall"] = "forall"
    var: str
    body: "Formula"


class Count(_Node):
    """∃^{>=m}, ∃^{=m} or ∃^{<=m}."""

    op: Literal["count"] = "count"
    kind: Literal[">=", "=", "<="]
    m: int = Field(ge=0)
    var: str
    body: "Formula"


Formula = Annotated[
    Union[Atom, Eq, Not, And, Or, Implies, Exists, Forall, Count], Field(discriminator="op")
]

for _cls in (Not, And, Or, Implies, Exists, Forall, Count):
    _cls.model_rebuild()

TRUE = And()
FALSE = Or()


def conj(*parts) -> And:
    return And(parts=tuple(parts))


def disj(*parts) -> Or:
    return Or(parts=tuple(parts))


def atom(rel: str, *args: str) -> Atom:
    return Atom(rel=rel, args=tuple(args))


# =============================================================================
# Printing and parsing
# =============================================================================

_COUNT_HEADS = {"exists>=": ">=", "exists=": "=", "exists<=": "<="}
_COUNT_NAMES = {v: k for k, v in _COUNT_HEADS.items()}


def to_sexpr(phi) -> str:
    if isinstance(phi, Atom):
        return "(" + " ".join((phi.rel,) + phi.args) + ")"
    if isinstance(phi, Eq):
        return f"(= {phi.left} {phi.right})"
    if isinstance(phi, Not):
        return f"(not {to_sexpr(phi.body)})"
    if isinstance(phi, (And, Or)):
        head = "and" if isinstance(phi, And) else "or"
        return "(" + " ".join([head] + [to_sexpr(p) for p in phi.parts]) + ")"
    if isinstance(phi, Implies):
        return f"(-> {to_sexpr(phi.left)} {to_sexpr(phi.right)})"
    if isinstance(phi, (Exists, Forall)):
        head = "exists" if isinstance(phi, Exists) else "forall"
        return f"({head} {phi.var} {to_sexpr(phi.body)})"
    if isinstance(phi, Count):
        return f"({_COUNT_NAMES[phi.kind]} {phi.m} {phi.var} {to_sexpr(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
        elif ch in "()":
            tokens.append((ch, pos))
            pos += 1
        else:
            start = pos
            while pos < len(text) and not text[pos].isspace() and text[pos] not in "()":
                pos += 1
            tokens.append((text[start:pos], start))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Optional[Signature]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.end = len(text)
        self.sig = sig

    def peek(self) -> tuple[str, int]:
        if self.i >= len(self.tokens):
            raise FormulaSyntaxError("unexpected end of input", position=self.end)
        return self.tokens[self.i]

    def take(self) -> tuple[str, int]:
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, want: str) -> None:
        tok, pos = self.take()
        if tok != want:
            raise FormulaSyntaxError(f"expected {want!r}, got {tok!r}", position=pos)

    def name(self) -> str:
        tok, pos = self.take()
        if tok in "()":
            raise FormulaSyntaxError(f"expected a name, got {tok!r}", position=pos)
        return tok

    def formula(self):
        self.expect("(")
        head, pos = self.take()
        if head in ("(", ")"):
            raise FormulaSyntaxError("expected an operator", position=pos)

        if head in ("and", "or"):
            parts = []
            while self.peek()[0] != ")":
                parts.append(self.formula())
            self.take()
            return And(parts=tuple(parts)) if head == "and" else Or(parts=tuple(parts))
        if head == "not":
            body = self.formula()
            self.expect(")")
            return Not(body=body)
        if head == "->":
            left = self.formula()
            right = self.formula()
            self.expect(")")
            return Implies(left=left, right=right)
        if head == "=":
            left, right = self.name(), self.name()
            self.expect(")")
            return Eq(left=left, right=right)
        if head in ("exists", "forall"):
            var = self.name()
            body = self.formula()
            self.expect(")")
            return Exists(var=var, body=body) if head == "exists" else Forall(var=var, body=body)
        if head in _COUNT_HEADS:
            raw, mpos = self.take()
            if not raw.isdigit():
                raise FormulaSyntaxError(f"malformed count {raw!r}", position=mpos)
            var = self.name()
            body = self.formula()
            self.expect(")")
            return Count(kind=_COUNT_HEADS[head], m=int(raw), var=var, body=body)

        args = []
        while self.peek()[0] != ")":
            args.append(self.name())
        self.take()
        if self.sig is not None:
            if head not in self.sig.names:
                raise FormulaSyntaxError(f"unknown relation {head!r}", position=pos)
            if self.sig.arity(head) != len(args):
                raise FormulaSyntaxError(
                    f"{head} has arity {self.sig.arity(head)}, got {len(args)}", position=pos
                )
        return Atom(rel=head, args=tuple(args))


def parse(text: str, sig: Optional[Signature] = None):
    """Read one formula; with a signature, relation names and arities are checked."""
    parser = _Parser(text, sig)
    phi = parser.formula()
    if parser.i != len(parser.tokens):
        tok, pos = parser.tokens[parser.i]
        raise FormulaSyntaxError(f"trailing input {tok!r}", position=pos)
    return phi


def parse_with_header(text: str):
    """Leading `rel <name> <arity>` lines declare the signature; the rest is one formula."""
    relations = []
    body_lines = []
    for line in text.splitlines():
        tokens = line.split()
        if tokens and tokens[0] == "rel" and not body_lines:
            relations.append((tokens[1], int(tokens[2])))
        else:
            body_lines.append(line)
    sig = Signature.of(*relations)
    return sig, parse("\n".join(body_lines), sig)


# =============================================================================
# Syntactic measures
# =============================================================================


def free_variables(phi) -> frozenset[str]:
    if isinstance(phi, Atom):
        return frozenset(phi.args)
    if isinstance(phi, Eq):
        return frozenset((phi.left, phi.right))
    if isinstance(phi, Not):
        return free_variables(phi.body)
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(free_variables(p) for p in phi.parts))
    if isinstance(phi, Implies):
        return free_variables(phi.left) | free_variables(phi.right)
    if isinstance(phi, (Exists, Forall, Count)):
        return free_variables(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def quantifier_depth(phi) -> int:
    if isinstance(phi, (Atom, Eq)):
        return 0
    if isinstance(phi, Not):
        return quantifier_depth(phi.body)
    if isinstance(phi, (And, Or)):
        return max((quantifier_depth(p) for p in phi.parts), default=0)
    if isinstance(phi, Implies):
        return max(quantifier_depth(phi.left), quantifier_depth(phi.right))
    return 1 + quantifier_depth(phi.body)


def _quantifier_free(phi) -> bool:
    return quantifier_depth(phi) == 0


def prefix_class(phi) -> str:
    """
    "Σk" / "Πk" for prenex formulas, "non-prenex" otherwise.

    ∃^{>=m} and ∃^{=m} count as existential, ∃^{<=m} as universal.
    Quantifier-free formulas are Σ0 (= Π0).
    """
    blocks: list[str] = []
    node = phi
    while isinstance(node, (Exists, Forall, Count)):
        if isinstance(node, Forall) or (isinstance(node, Count) and node.kind == "<="):
            kind = "A"
        else:
            kind = "E"
        if not blocks or blocks[-1] != kind:
            blocks.append(kind)
        node = node.body
    if not _quantifier_free(node):
        return "non-prenex"
    if not blocks:
        return "Σ0"
    return ("Σ" if blocks[0] == "E" else "Π") + str(len(blocks))


# =============================================================================
# Evaluation
# =============================================================================


class Evaluator:
    """Naive model checker over one structure, with an atom-evaluation budget."""

    def __init__(self, A: Structure, *, budget: Optional[int] = None):
        self.A = A
        self.rels = {name: A.rel(name) for name in A.sig.names}
        self.budget = budget
        self.steps = 0

    def _tick(self) -> None:
        self.steps += 1
        if self.budget is not None and self.steps > self.budget:
            raise BudgetExceeded(f"formula evaluation exceeded {self.budget} steps")

    def _value(self, var: str, asg: dict) -> int:
        try:
            return asg[var]
        except KeyError:
            raise UnboundVariable(f"variable {var!r} is not bound")

    def check(self, phi, asg: dict) -> bool:
        if isinstance(phi, Atom):
            self._tick()
            rel = self.rels.get(phi.rel)
            if rel is None:
                raise DimensionMismatch(f"relation {phi.rel!r} not in the structure's signature")
            return tuple(self._value(v, asg) for v in phi.args) in rel
        if isinstance(phi, Eq):
            self._tick()
            return self._value(phi.left, asg) == self._value(phi.right, asg)
        if isinstance(phi, Not):
            return not self.check(phi.body, asg)
        if isinstance(phi, And):
            return all(self.check(p, asg) for p in phi.parts)
        if isinstance(phi, Or):
            return any(self.check(p, asg) for p in phi.parts)
        if isinstance(phi, Implies):
            return (not self.check(phi.left, asg)) or self.check(phi.right, asg)
        if isinstance(phi, Exists):
            return any(self._witness(phi, asg, e) for e in range(self.A.n))
        if isinstance(phi, Forall):
            return all(self._witness(phi, asg, e) for e in range(self.A.n))
        if isinstance(phi, Count):
            return self._count(phi, asg)
        raise TypeError(f"not a formula: {phi!r}")

    def _witness(self, phi, asg: dict, e: int) -> bool:
        saved = asg.get(phi.var, _MISSING)
        asg[phi.var] = e
        try:
            return self.check(phi.body, asg)
        finally:
            if saved is _MISSING:
                del asg[phi.var]
            else:
                asg[phi.var] = saved

    def _count(self, phi: Count, asg: dict) -> bool:
        # stop as soon as the answer is fixed
        limit = phi.m if phi.kind == ">=" else phi.m + 1
        if phi.kind == ">=" and limit == 0:
            return True
        hits = 0
        for e in range(self.A.n):
            if self._witness(phi, asg, e):
                hits += 1
                if hits >= limit:
                    break
        if phi.kind == ">=":
            return hits >= phi.m
        if phi.kind == "=":
            return hits == phi.m
        return hits <= phi.m


_MISSING = object()


def evaluate(A: Structure, phi, asg: Optional[dict] = None, *, budget: Optional[int] = None) -> bool:
    """A ⊨ φ[asg]. Cost grows like n^(quantifier depth); pass a budget for large inputs."""
    asg = dict(asg or {})
    missing = free_variables(phi) - set(asg)
    if missing:
        raise UnboundVariable(f"unbound free variables: {sorted(missing)}")
    evaluator = Evaluator(A, budget=budget)
    result = evaluator.check(phi, asg)
    logger.debug(f"Evaluated formula in {evaluator.steps} atom steps: {result}")
    return result


# =============================================================================
# Counting-quantifier expansion (cross-check oracle)
# =============================================================================


def substitute(phi, old: str, new: str):
    """Rename free occurrences of old to new."""
    if isinstance(phi, Atom):
        return Atom(rel=phi.rel, args=tuple(new if a == old else a for a in phi.args))
    if isinstance(phi, Eq):
        return Eq(left=new if phi.left == old else phi.left, right=new if phi.right == old else phi.right)
    if isinstance(phi, Not):
        return Not(body=substitute(phi.body, old, new))
    if isinstance(phi, And):
        return And(parts=tuple(substitute(p, old, new) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(parts=tuple(substitute(p, old, new) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(left=substitute(phi.left, old, new), right=substitute(phi.right, old, new))
    if phi.var == old:
        return phi
    return phi.model_copy(update={"body": substitute(phi.body, old, new)})


def expand_counting(phi, _fresh=None):
    """
    Replace every counting quantifier by plain ones:
    ∃^{>=m}x ψ  becomes  ∃x1..∃xm (pairwise distinct ∧ ψ(x1) ∧ ... ∧ ψ(xm)),
    ∃^{<=m} is ¬∃^{>=m+1}, and ∃^{=m} is ∃^{>=m} ∧ ¬∃^{>=m+1}.
    """
    fresh = _fresh if _fresh is not None else itertools.count()
    if isinstance(phi, (Atom, Eq)):
        return phi
    if isinstance(phi, Not):
        return Not(body=expand_counting(phi.body, fresh))
    if isinstance(phi, (And, Or)):
        return type(phi)(parts=tuple(expand_counting(p, fresh) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(left=expand_counting(phi.left, fresh), right=expand_counting(phi.right, fresh))
    if isinstance(phi, (Exists, Forall)):
        return type(phi)(var=phi.var, body=expand_counting(phi.body, fresh))

    body = expand_counting(phi.body, fresh)

    def at_least(m: int):
        if m == 0:
            return TRUE
        names = [f"{phi.var}'{next(fresh)}" for _ in range(m)]
        distinct = [Not(body=Eq(left=a, right=b)) for a, b in itertools.combinations(names, 2)]
        inner = conj(*distinct, *(substitute(body, phi.var, nm) for nm in names))
        for nm in reversed(names):
            inner = Exists(var=nm, body=inner)
        return inner

    if phi.kind == ">=":
        return at_least(phi.m)
    if phi.kind == "<=":
        return Not(body=at_least(phi.m + 1))
    return conj(at_least(phi.m), Not(body=at_least(phi.m + 1)))


# =============================================================================
# The zig-zag formula family
# =============================================================================


def e_name(i: int, j: int) -> str:
    return f"E_{i}_{j}"


def f_name(k: int) -> str:
    return f"F_{k}"


def l_name(k: int) -> str:
    return f"L_{k}"


def sigma(D: int) -> Signature:
    """{E_{i,j}} ∪ {F_k} ∪ {L_k} ∪ {R}: 3·D^4 + 1 binary relations."""
    D2, D4 = D * D, D**4
    pairs = [(e_name(i, j), 2) for i in range(D2) for j in range(D2)]
    pairs += [(f_name(k), 2) for k in range(D4)]
    pairs += [(l_name(k), 2) for k in range(D4)]
    pairs.append(("R", 2))
    return Signature.of(*pairs)


class ZigzagFormulas(BaseModel):
    """The four conjuncts of φ_zigzag over σ(D)."""

    model_config = ConfigDict(frozen=True)

    D: int
    sig: Signature
    tree: Formula
    rotation_map: Formula
    base: Formula
    recursion: Formula

    @property
    def full(self) -> And:
        return conj(self.tree, self.rotation_map, self.base, self.recursion)


def _f_any(D: int, x: str, y: str) -> Or:
    return Or(parts=tuple(atom(f_name(k), x, y) for k in range(D**4)))


def phi_root(D: int, x: str = "x", y: str = "y") -> Forall:
    """x has no F-parent."""
    return Forall(var=y, body=Not(body=_f_any(D, y, x)))


def phi_tree(D: int):
    D4 = D**4
    x, y = "x", "y"
    root_or_child = Forall(var=x, body=disj(
        conj(phi_root(D, x, y), atom("R", x, x)),
        conj(
            Count(kind="=", m=1, var=y, body=_f_any(D, y, x)),
            Not(body=Exists(var=y, body=atom("R", x, y))),
            Not(body=Exists(var=y, body=atom("R", y, x))),
        ),
    ))

    leaf = conj(
        Not(body=Exists(var=y, body=_f_any(D, x, y))),
        conj(*(atom(l_name(k), x, x) for k in range(D4))),
        Forall(var=y, body=Implies(
            left=Not(body=Eq(left=y, right=x)),
            right=conj(*(
                part for k in range(D4)
                for part in (Not(body=atom(l_name(k), x, y)), Not(body=atom(l_name(k), y, x)))
            )),
        )),
    )

    def child(k: int):
        yk = f"y{k}"
        return Exists(var=yk, body=conj(
            Not(body=Eq(left=x, right=yk)),
            atom(f_name(k), x, yk),
            conj(*(Not(body=atom(f_name(k2), x, yk)) for k2 in range(D4) if k2 != k)),
            Forall(var=y, body=Implies(
                left=Not(body=Eq(left=y, right=yk)), right=Not(body=atom(f_name(k), x, y))
            )),
        ))

    inner = conj(
        Not(body=Exists(var=y, body=disj(*(
            part for k in range(D4)
            for part in (atom(l_name(k), x, y), atom(l_name(k), y, x))
        )))),
        conj(*(child(k) for k in range(D4))),
    )

    return conj(
        Count(kind="<=", m=1, var=x, body=phi_root(D, x, y)),
        root_or_child,
        Forall(var=x, body=disj(leaf, inner)),
    )


def phi_rotation_map(D: int):
    D2 = D * D
    x, y = "x", "y"
    symmetric = Forall(var=x, body=Forall(var=y, body=conj(*(
        Implies(left=atom(e_name(i, j), x, y), right=atom(e_name(j, i), y, x))
        for i in range(D2) for j in range(D2)
    ))))
    functional = Forall(var=x, body=conj(*(
        disj(*(
            conj(
                Count(kind="=", m=1, var=y, body=atom(e_name(i, j), x, y)),
                conj(*(
                    Not(body=Exists(var=y, body=atom(e_name(i, j2), x, y)))
                    for j2 in range(D2) if j2 != j
                )),
            )
            for j in range(D2)
        ))
        for i in range(D2)
    )))
    return conj(symmetric, functional)


def phi_base(D: int, rot_H2: RotMapGraph):
    """
    The root carries E_{i,i}(r, r) and no other E-tuples; its children
    realize ROT_{H^2}: one conjunct per rotation-map entry.
    """
    D2, D4 = D * D, D**4
    if rot_H2.n != D4 or rot_H2.D != D2:
        raise DimensionMismatch(f"H^2 must have {D4} vertices and degree {D2}")
    x, y, y2 = "x", "y", "y'"
    isolated = Forall(var=y, body=Implies(
        left=Not(body=Eq(left=x, right=y)),
        right=conj(*(
            part for i in range(D2) for j in range(D2)
            for part in (Not(body=atom(e_name(i, j), x, y)), Not(body=atom(e_name(i, j), y, x)))
        )),
    ))
    children = []
    for k in range(D4):
        for i in range(D2):
            kp, ip = rot_H2.rot(k, i)
            children.append(Exists(var=y, body=Exists(var=y2, body=conj(
                atom(f_name(k), x, y), atom(f_name(kp), x, y2), atom(e_name(i, ip), y, y2)
            ))))
    return Forall(var=x, body=Implies(
        left=phi_root(D, x, "z"),
        right=conj(conj(*(atom(e_name(i, i), x, x) for i in range(D2))), isolated, conj(*children)),
    ))


def phi_recursion(D: int, rot_H: RotMapGraph):
    """
    For x, z joined by an E-path of length two, the children of x and z carry
    the zig-zag edges of G^2 ⓩ H. Pairs of leaves and pairs involving the
    root are exempt.
    """
    D2, D4 = D * D, D**4
    if rot_H.n != D4 or rot_H.D != D:
        raise DimensionMismatch(f"H must have {D4} vertices and degree {D}")
    x, y, z, xp, zp = "x", "y", "z", "x'", "z'"

    clauses = []
    for k1, l1, k2, l2 in itertools.product(range(D2), repeat=4):
        kp = k1 * D2 + k2
        lp = l2 * D2 + l1
        edges = []
        for ip in range(D):
            k, i = rot_H.rot(kp, ip)
            for j in range(D):
                l, jp = rot_H.rot(lp, j)
                edges.append(Exists(var=xp, body=Exists(var=zp, body=conj(
                    atom(f_name(k), x, xp),
                    atom(f_name(l), z, zp),
                    atom(e_name(i * D + j, jp * D + ip), xp, zp),
                ))))
        path = Exists(var=y, body=conj(atom(e_name(k1, l1), x, y), atom(e_name(k2, l2), y, z)))
        clauses.append(Implies(left=path, right=conj(*edges)))

    return Forall(var=x, body=Forall(var=z, body=disj(
        conj(
            Not(body=Exists(var=y, body=_f_any(D, x, y))),
            Not(body=Exists(var=y, body=_f_any(D, z, y))),
        ),
        phi_root(D, x, y),
        phi_root(D, z, y),
        conj(*clauses),
    )))


def phi_zigzag(D: int, rot_H: RotMapGraph, rot_H2: RotMapGraph) -> ZigzagFormulas:
    """φ_tree ∧ φ_rotationMap ∧ φ_base ∧ φ_recursion with ROT_H embedded."""
    if rot_H.n != D**4 or rot_H.D != D:
        raise DimensionMismatch(f"H must be {D}-regular on {D**4} vertices")
    logger.info(f"Generating zig-zag formulas for D={D}")
    return ZigzagFormulas(
        D=D,
        sig=sigma(D),
        tree=phi_tree(D),
        rotation_map=phi_rotation_map(D),
        base=phi_base(D, rot_H2),
        recursion=phi_recursion(D, rot_H),
    )
