"""
Printed notation for formulas, and a recursive-descent parser for it.

    ∃y. (x = 0 ∨ (x*y = 1 ∧ ¬B(y;t)))

Rules: "*" and "^" for products and powers (negative exponents as t^-2);
∧ and ∨ never mix without parentheses; ¬ and the quantifiers bind to a single
unary-level formula. print_node and parse_node are inverse on every AST the
template builders produce.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Optional, Tuple

from src.errors import FormulaSyntaxError
from src.formulas.ast import (
    Add,
    And,
    Apply,
    Eq,
    Exists,
    ForAll,
    Formula,
    InO,
    Mul,
    Node,
    Not,
    Num,
    Or,
    Param,
    Pow,
    Sub,
    Term,
    Top,
    Var,
)

EXISTS, FORALL, NOT, AND, OR, TOP = "∃", "∀", "¬", "∧", "∨", "⊤"


# ── Printer ─────────────────────────────────────────────────────────────────


def _num(value) -> str:
    if isinstance(value, Fraction) and value.denominator != 1:
        return f"{value.numerator}/{value.denominator}"
    return str(int(value))


def print_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Param):
        return "t"
    if isinstance(term, Num):
        return _num(term.value)
    if isinstance(term, Add):
        parts = []
        for i, child in enumerate(term.children):
            text = print_term(child)
            if isinstance(child, Add) or (i and isinstance(child, Sub)):
                text = f"({text})"
            parts.append(text)
        return " + ".join(parts)
    if isinstance(term, Sub):
        right = print_term(term.right)
        if isinstance(term.right, (Add, Sub)):
            right = f"({right})"
        return f"{print_term(term.left)} - {right}"
    if isinstance(term, Mul):
        return "*".join(
            f"({print_term(c)})" if isinstance(c, (Add, Sub, Mul)) else print_term(c)
            for c in term.children
        )
    if isinstance(term, Pow):
        base = print_term(term.base)
        simple = isinstance(term.base, (Var, Param)) or (
            isinstance(term.base, Num) and isinstance(term.base.value, int) and term.base.value >= 0
        )
        return f"{base if simple else f'({base})'}^{term.exponent}"
    raise TypeError(f"not a term: {term!r}")


def print_node(node: Node) -> str:
    if isinstance(node, Top):
        return TOP
    if isinstance(node, Eq):
        return f"{print_term(node.left)} = {print_term(node.right)}"
    if isinstance(node, InO):
        return f"O({print_term(node.term)})"
    if isinstance(node, Apply):
        args = ", ".join(print_term(a) for a in node.args)
        if node.param is not None:
            args += f";{print_term(node.param)}"
        return f"{node.name}({args})"
    if isinstance(node, Not):
        inner = print_node(node.child)
        if isinstance(node.child, (Eq, And, Or)):
            inner = f"({inner})"
        return f"{NOT}{inner}"
    if isinstance(node, (And, Or)):
        joiner = f" {AND} " if isinstance(node, And) else f" {OR} "
        return joiner.join(
            f"({print_node(c)})" if isinstance(c, (And, Or)) else print_node(c)
            for c in node.children
        )
    if isinstance(node, (Exists, ForAll)):
        symbol = EXISTS if isinstance(node, Exists) else FORALL
        body = print_node(node.body)
        if isinstance(node.body, (And, Or)):
            body = f"({body})"
        return f"{symbol}{node.var}. {body}"
    raise TypeError(f"not a formula node: {node!r}")


def signature(formula: Formula) -> str:
    """Head of a definition, e.g. ``G(x;t)`` or ``C′(x)``."""
    head = ", ".join(formula.free)
    if formula.language == "ring_t":
        head += ";t"
    return f"{formula.name}({head})"


def print_formula(formula: Formula, with_definitions: bool = False) -> str:
    """``NAME(x;t) := body``; optionally followed by every referenced definition."""
    lines = [f"{signature(formula)} := {print_node(formula.body)}"]
    if with_definitions:
        seen = {formula.name}
        stack = list(formula.definitions.values())
        while stack:
            definition = stack.pop(0)
            if definition.name in seen:
                continue
            seen.add(definition.name)
            lines.append(f"{signature(definition)} := {print_node(definition.body)}")
            stack.extend(definition.definitions.values())
    return "\n".join(lines)


# ── Parser ──────────────────────────────────────────────────────────────────

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+(?:/\d+)?)"
    r"|(?P<name>[A-Zψχαβγ][′″']*)"
    r"|(?P<ident>[a-z][a-z0-9_]*)"
    r"|(?P<sym>[∃∀¬∧∨⊤().,;=+\-*^])"
    r")"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if m is None or m.end() == pos:
                raise FormulaSyntaxError(f"unexpected input {stripped[pos:]!r}")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind)))
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def peek_kind(self) -> Optional[str]:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        if self.i >= len(self.tokens):
            raise FormulaSyntaxError(f"unexpected end of input in {self.text!r}")
        value = self.tokens[self.i][1]
        if expected is not None and value != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, found {value!r} in {self.text!r}")
        self.i += 1
        return value

    # formulas

    def formula(self) -> Node:
        first = self.unary()
        op = self.peek()
        if op not in (AND, OR):
            return first
        children = [first]
        while self.peek() == op:
            self.take()
            children.append(self.unary())
        if self.peek() in (AND, OR):
            raise FormulaSyntaxError(f"mixed {AND}/{OR} without parentheses in {self.text!r}")
        return And(tuple(children)) if op == AND else Or(tuple(children))

    def unary(self) -> Node:
        token = self.peek()
        if token == NOT:
            self.take()
            return Not(self.unary())
        if token in (EXISTS, FORALL):
            self.take()
            if self.peek_kind() != "ident" or self.peek() == "t":
                raise FormulaSyntaxError(f"expected a variable after {token} in {self.text!r}")
            name = self.take()
            self.take(".")
            body = self.unary()
            return Exists(name, body) if token == EXISTS else ForAll(name, body)
        if token == TOP:
            self.take()
            return Top()
        if token == "(":
            saved = self.i
            try:
                self.take("(")
                inner = self.formula()
                self.take(")")
                if self.peek() not in ("=", "+", "-", "*", "^"):
                    return inner
            except FormulaSyntaxError:
                pass
            self.i = saved
        if self.peek_kind() == "name":
            return self.application()
        left = self.term()
        self.take("=")
        return Eq(left, self.term())

    def application(self) -> Node:
        name = self.take().replace("''", "″").replace("'", "′")
        self.take("(")
        args = [self.term()]
        while self.peek() == ",":
            self.take()
            args.append(self.term())
        param = None
        if self.peek() == ";":
            self.take()
            param = self.term()
        self.take(")")
        if name == "O":
            if len(args) != 1 or param is not None:
                raise FormulaSyntaxError("O takes a single term")
            return InO(args[0])
        return Apply(name, tuple(args), param)

    # terms

    def term(self) -> Term:
        node = self.product()
        open_add = False
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.product()
            if op == "+":
                node = Add(node.children + (rhs,)) if open_add else Add((node, rhs))
                open_add = True
            else:
                node = Sub(node, rhs)
                open_add = False
        return node

    def product(self) -> Term:
        children = [self.power()]
        while self.peek() == "*":
            self.take()
            children.append(self.power())
        return children[0] if len(children) == 1 else Mul(tuple(children))

    def power(self) -> Term:
        base = self.atom()
        if self.peek() == "^":
            self.take()
            sign = -1 if self.peek() == "-" else 1
            if sign < 0:
                self.take()
            if self.peek_kind() != "num" or "/" in self.peek():
                raise FormulaSyntaxError(f"expected an integer exponent in {self.text!r}")
            return Pow(base, sign * int(self.take()))
        return base

    def atom(self) -> Term:
        kind, token = (self.peek_kind(), self.peek())
        if token == "(":
            self.take()
            inner = self.term()
            self.take(")")
            return inner
        if kind == "num":
            self.take()
            if "/" in token:
                num, den = token.split("/")
                return Num(Fraction(int(num), int(den)))
            return Num(int(token))
        if kind == "ident":
            self.take()
            return Param() if token == "t" else Var(token)
        raise FormulaSyntaxError(f"expected a term, found {token!r} in {self.text!r}")

    def done(self) -> None:
        if self.i != len(self.tokens):
            raise FormulaSyntaxError(f"trailing input {self.tokens[self.i][1]!r} in {self.text!r}")


def parse_node(text: str) -> Node:
    parser = _Parser(text)
    node = parser.formula()
    parser.done()
    return node


def parse_term(text: str) -> Term:
    parser = _Parser(text)
    term = parser.term()
    parser.done()
    return term
