"""
Abstract syntax for first-order formulas over the ring language.

Terms are polynomial expressions in variables, integer or rational constants
and the distinguished constant ``t``. Formulas are equality atoms, valuation
ring atoms O(term), applications of named definitions, the boolean
connectives and the two quantifiers. All nodes are frozen dataclasses, so
structural equality is AST equality.

A ``Formula`` wraps a body with its name, free variables, language tag and
the definitions of every template its body applies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Iterator, Literal, Mapping, Optional, Tuple, Union

from src.errors import IllFormedFormula

Language = Literal["ring", "ring_t", "vf"]


# ── Terms ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    value: Union[int, Fraction]


@dataclass(frozen=True)
class Param:
    """The constant t."""


@dataclass(frozen=True)
class Add:
    children: Tuple["Term", ...]


@dataclass(frozen=True)
class Sub:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Mul:
    children: Tuple["Term", ...]


@dataclass(frozen=True)
class Pow:
    base: "Term"
    exponent: int


Term = Union[Var, Num, Param, Add, Sub, Mul, Pow]


# ── Formulas ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class InO:
    term: Term


@dataclass(frozen=True)
class Apply:
    """Application of a named definition, ``E(y;t)`` or ``C′(x)``."""

    name: str
    args: Tuple[Term, ...]
    param: Optional[Term] = None


@dataclass(frozen=True)
class And:
    children: Tuple["Node", ...]


@dataclass(frozen=True)
class Or:
    children: Tuple["Node", ...]


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Node"


@dataclass(frozen=True)
class ForAll:
    var: str
    body: "Node"


@dataclass(frozen=True)
class Top:
    pass


Node = Union[Eq, InO, Apply, And, Or, Not, Exists, ForAll, Top]


@dataclass(frozen=True)
class Formula:
    name: str
    body: Node
    free: Tuple[str, ...]
    language: Language
    params: Mapping[str, object] = field(default_factory=dict, compare=False)
    definitions: Mapping[str, "Formula"] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        loose = [name for name in free_variables(self.body) if name not in self.free]
        if loose:
            raise IllFormedFormula(f"{self.name}: free variables {loose} missing from {self.free}")
        if self.language != "ring_t" and uses_param(self.body):
            raise IllFormedFormula(f"{self.name}: the constant t occurs in a {self.language} formula")


# ── Constructors ────────────────────────────────────────────────────────────


def add(*children: Term) -> Term:
    return children[0] if len(children) == 1 else Add(tuple(children))


def mul(*children: Term) -> Term:
    return children[0] if len(children) == 1 else Mul(tuple(children))


def pow_(base: Term, exponent: int) -> Term:
    return base if exponent == 1 else Pow(base, exponent)


def conj(*children: Node) -> Node:
    return children[0] if len(children) == 1 else And(tuple(children))


def disj(*children: Node) -> Node:
    return children[0] if len(children) == 1 else Or(tuple(children))


def exists(names: str, body: Node) -> Node:
    """exists("y z", body) = ∃y. ∃z. body"""
    for name in reversed(names.split()):
        body = Exists(name, body)
    return body


def forall(names: str, body: Node) -> Node:
    for name in reversed(names.split()):
        body = ForAll(name, body)
    return body


# ── Traversal ───────────────────────────────────────────────────────────────


def term_children(term: Term) -> Tuple[Term, ...]:
    if isinstance(term, (Add, Mul)):
        return term.children
    if isinstance(term, Sub):
        return (term.left, term.right)
    if isinstance(term, Pow):
        return (term.base,)
    return ()


def node_terms(node: Node) -> Tuple[Term, ...]:
    if isinstance(node, Eq):
        return (node.left, node.right)
    if isinstance(node, InO):
        return (node.term,)
    if isinstance(node, Apply):
        return node.args + ((node.param,) if node.param is not None else ())
    return ()


def node_children(node: Node) -> Tuple[Node, ...]:
    if isinstance(node, (And, Or)):
        return node.children
    if isinstance(node, Not):
        return (node.child,)
    if isinstance(node, (Exists, ForAll)):
        return (node.body,)
    return ()


def walk(node: Node) -> Iterator[Node]:
    yield node
    for child in node_children(node):
        yield from walk(child)


def term_vars(term: Term) -> Iterator[str]:
    if isinstance(term, Var):
        yield term.name
    for child in term_children(term):
        yield from term_vars(child)


def uses_param(node: Node) -> bool:
    def in_term(term: Term) -> bool:
        return isinstance(term, Param) or any(in_term(child) for child in term_children(term))

    return any(in_term(term) for n in walk(node) for term in node_terms(n))


def free_variables(node: Node) -> Tuple[str, ...]:
    """Free variables in order of first occurrence."""
    seen: Dict[str, None] = {}

    def visit(n: Node, bound: frozenset) -> None:
        for term in node_terms(n):
            for name in term_vars(term):
                if name not in bound:
                    seen.setdefault(name, None)
        if isinstance(n, (Exists, ForAll)):
            visit(n.body, bound | {n.var})
            return
        for child in node_children(n):
            visit(child, bound)

    visit(node, frozenset())
    return tuple(seen)


def applied_names(node: Node) -> Tuple[str, ...]:
    names: Dict[str, None] = {}
    for n in walk(node):
        if isinstance(n, Apply):
            names.setdefault(n.name, None)
    return tuple(names)


# ── Substitution ────────────────────────────────────────────────────────────


def substitute_term(term: Term, mapping: Mapping[str, Term], param: Optional[Term] = None) -> Term:
    if isinstance(term, Var):
        return mapping.get(term.name, term)
    if isinstance(term, Param):
        return param if param is not None else term
    if isinstance(term, Add):
        return Add(tuple(substitute_term(c, mapping, param) for c in term.children))
    if isinstance(term, Mul):
        return Mul(tuple(substitute_term(c, mapping, param) for c in term.children))
    if isinstance(term, Sub):
        return Sub(substitute_term(term.left, mapping, param), substitute_term(term.right, mapping, param))
    if isinstance(term, Pow):
        return Pow(substitute_term(term.base, mapping, param), term.exponent)
    return term


def map_node(node: Node, on_terms: Callable[[Term], Term], on_node: Callable[[Node], Optional[Node]] = lambda n: None) -> Node:
    """Rebuild ``node`` bottom-up; ``on_node`` may replace any node outright."""
    replaced = on_node(node)
    if replaced is not None:
        return replaced
    if isinstance(node, Eq):
        return Eq(on_terms(node.left), on_terms(node.right))
    if isinstance(node, InO):
        return InO(on_terms(node.term))
    if isinstance(node, Apply):
        param = on_terms(node.param) if node.param is not None else None
        return Apply(node.name, tuple(on_terms(a) for a in node.args), param)
    if isinstance(node, (And, Or)):
        return type(node)(tuple(map_node(c, on_terms, on_node) for c in node.children))
    if isinstance(node, Not):
        return Not(map_node(node.child, on_terms, on_node))
    if isinstance(node, (Exists, ForAll)):
        return type(node)(node.var, map_node(node.body, on_terms, on_node))
    return node


def rename_bound(node: Node, fresh: Callable[[str], str]) -> Node:
    """Give every bound variable a fresh name, scope by scope."""

    def go(n: Node, renames: Mapping[str, Term]) -> Node:
        if isinstance(n, (Exists, ForAll)):
            new = fresh(n.var)
            inner = dict(renames)
            inner[n.var] = Var(new)
            return type(n)(new, go(n.body, inner))
        if isinstance(n, (And, Or)):
            return type(n)(tuple(go(c, renames) for c in n.children))
        if isinstance(n, Not):
            return Not(go(n.child, renames))
        return map_node(n, lambda term: substitute_term(term, renames))

    return go(node, {})


def fresh_namer(taken: Tuple[str, ...]) -> Callable[[str], str]:
    """name -> name_k for the least k making it unused."""
    used = set(taken)

    def fresh(name: str) -> str:
        for k in itertools.count(1):
            candidate = f"{name}_{k}"
            if candidate not in used:
                used.add(candidate)
                return candidate
        raise AssertionError("unreachable")

    return fresh


def instantiate(definition: Formula, args: Tuple[Term, ...], param: Optional[Term], taken: Tuple[str, ...]) -> Node:
    """The body of ``definition`` with its free variables replaced by ``args``."""
    body = rename_bound(definition.body, fresh_namer(taken))
    mapping = dict(zip(definition.free, args))
    return map_node(body, lambda term: substitute_term(term, mapping, param))


def all_variables(node: Node) -> Tuple[str, ...]:
    names: Dict[str, None] = {}
    for n in walk(node):
        if isinstance(n, (Exists, ForAll)):
            names.setdefault(n.var, None)
        for term in node_terms(n):
            for name in term_vars(term):
                names.setdefault(name, None)
    return tuple(names)


def inline(formula: Formula) -> Formula:
    """Expand every application into its definition, recursively."""

    def expand(node: Node, defs: Mapping[str, Formula]) -> Node:
        def on_node(n: Node) -> Optional[Node]:
            if isinstance(n, Apply) and n.name in defs:
                definition = defs[n.name]
                taken = all_variables(formula.body) + tuple(v for a in n.args for v in term_vars(a))
                body = instantiate(definition, n.args, n.param, taken)
                return expand(body, definition.definitions)
            return None

        return map_node(node, lambda term: term, on_node)

    return replace(formula, body=expand(formula.body, formula.definitions), definitions={})
