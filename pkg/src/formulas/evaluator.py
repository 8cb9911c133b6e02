"""
Three-valued evaluation of template formulas on truncated series.

Existential templates are settled by decision procedures:
  A(x;t)  1 + x^l t is an l-th power: l | v and the leading coefficient is one
  C(x;t)  x = 0 or A fails at x^-1
  E(x;t)  A holds at x and at x^-1
  G(x;t)  E holds at x / t
  ψ(x)    every exponent is divisible by p^l
  χ(x;u)  v(x - f(u)) >= N + 1
Universal templates and their valued-field variants are settled through the
sets they define (v >= 0, v >= 1, v = 0, v = 1). A quantifier ∃u whose body
starts with G(u;t) ranges over uniformisers modulo t^K and is enumerated.
Anything else (in particular Ax's formula) is not evaluated.
"""

from __future__ import annotations

import itertools
import logging
from typing import Callable, Dict, Iterable, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, Field

from src.algebra.compose import compose
from src.algebra.field import FieldElement, power_residue
from src.algebra.series import (
    Series,
    add,
    in_M,
    in_O,
    invert,
    is_uniformiser,
    is_unit,
    mul,
    power,
    shift,
    sub,
    val_lower,
)
from src.config import ENUMERATION_CAP, SEARCH_DEPTH
from src.errors import CharZero, DepthCap, InsufficientPrecision, NotEvaluable, ZeroToPrecision
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
from src.formulas.templates import TemplateParams, canonical_name

logger = logging.getLogger(__name__)

Verdict = Literal["true", "false", "unknown"]
Reason = Literal["insufficient_precision", "search_depth_exhausted"]


class EvalResult(BaseModel):
    verdict: Verdict
    reason: Optional[Reason] = Field(default=None, description="Set exactly when verdict is unknown")
    witness: Optional[str] = Field(default=None, description="Uniformiser found by enumeration")

    def to_dict(self) -> dict:
        return self.model_dump(exclude_none=True)


TRUE = EvalResult(verdict="true")
FALSE = EvalResult(verdict="false")


def _unknown(reason: Reason) -> EvalResult:
    return EvalResult(verdict="unknown", reason=reason)


def _from_bool(value: bool) -> EvalResult:
    return TRUE if value else FALSE


def _settle(decide: Callable[[], bool]) -> EvalResult:
    try:
        return _from_bool(decide())
    except (InsufficientPrecision, ZeroToPrecision):
        return _unknown("insufficient_precision")


# ── Kleene connectives ──────────────────────────────────────────────────────


def _not(r: EvalResult) -> EvalResult:
    if r.verdict == "unknown":
        return r
    return FALSE if r.verdict == "true" else TRUE


def _all(results: Iterable[Callable[[], EvalResult]]) -> EvalResult:
    pending: Optional[EvalResult] = None
    witness: Optional[str] = None
    for thunk in results:
        r = thunk()
        if r.verdict == "false":
            return FALSE
        if r.verdict == "unknown":
            pending = pending or r
        witness = witness or r.witness
    return pending or EvalResult(verdict="true", witness=witness)


def _any(results: Iterable[Callable[[], EvalResult]]) -> EvalResult:
    pending: Optional[EvalResult] = None
    for thunk in results:
        r = thunk()
        if r.verdict == "true":
            return r
        if r.verdict == "unknown":
            pending = pending or r
    return pending or FALSE


# ── Decision procedures ─────────────────────────────────────────────────────


def robinson(x: Series, l: int) -> bool:
    """1 + x^l t is an l-th power; l is prime to the characteristic, so Hensel lifts."""
    if x.is_empty:
        if x.precision >= 0:
            return True
        raise InsufficientPrecision(f"v(x) >= {x.precision} does not decide A")
    p = x.characteristic
    tail = shift(power(x, l), 1)
    z = add(Series.monomial(p, 0, max(tail.precision, 1)), tail)
    if z.is_empty:
        raise InsufficientPrecision(f"1 + x^{l} t is zero to precision {z.precision}")
    v, lead = z.terms[0]
    return v % l == 0 and power_residue(FieldElement(p, lead), l)


def in_maximal_ideal(x: Series, l: int) -> bool:
    if x.is_empty:
        if x.precision >= 1:
            return True
        raise InsufficientPrecision(f"v(x) >= {x.precision} does not decide C")
    return not robinson(invert(x), l)


def is_unit_by_robinson(x: Series, l: int) -> bool:
    if x.is_empty:
        if x.precision >= 1:
            return False
        raise InsufficientPrecision(f"v(x) >= {x.precision} does not decide E")
    return robinson(x, l) and robinson(invert(x), l)


def is_power(x: Series, content: int) -> bool:
    """x is a p^content-th power, certified on the stored exponents."""
    p = x.characteristic
    if content == 0 or p == 0:
        return True
    if x.is_empty:
        raise InsufficientPrecision(f"series is zero to precision {x.precision}")
    q = p**content
    return all(e % q == 0 for e, _ in x.terms)


def near_center(x: Series, N: int, f: Series, param: Optional[Series] = None) -> bool:
    """v(x - f(param)) >= N + 1."""
    center = f if param is None else compose(f, param)
    d = sub(x, center)
    if d.terms:
        return d.terms[0][0] >= N + 1
    if d.precision >= N + 1:
        return True
    raise InsufficientPrecision(f"x - f is zero only to precision {d.precision} <= {N}")


_BY_SET: Dict[str, Callable[[Series], bool]] = {
    "B": in_O,
    "D": in_M,
    "F": is_unit,
    "H": is_uniformiser,
    "C′": in_M,
    "D′": in_M,
    "E′": is_unit,
    "F′": is_unit,
    "H′": is_uniformiser,
}

DECIDABLE = ("A", "C", "E", "G", "ψ", "χ") + tuple(_BY_SET)


def eval_template(
    name: str, params: TemplateParams, x: Series, param: Optional[Series] = None
) -> EvalResult:
    """Truth of the named template at x (with t replaced by ``param`` when given)."""
    name = canonical_name(name)
    l = params.l
    if name == "A":
        return _settle(lambda: robinson(x, l))
    if name == "C":
        return _settle(lambda: in_maximal_ideal(x, l))
    if name == "E":
        return _settle(lambda: is_unit_by_robinson(x, l))
    if name == "G":
        return _settle(lambda: is_unit_by_robinson(shift(x, -1), l))
    if name == "ψ":
        return _settle(lambda: is_power(x, params.content))
    if name == "χ":
        if params.radius is None or params.center is None:
            raise NotEvaluable("χ needs a radius and a centre")
        return _settle(lambda: near_center(x, params.radius, params.center, param))
    if name in _BY_SET:
        return _settle(lambda: _BY_SET[name](x))
    raise NotEvaluable(f"{name} has no decision procedure")


# ── Structural evaluation ───────────────────────────────────────────────────


class _Evaluator:
    def __init__(self, x: Series, depth: int):
        self.p = x.characteristic
        self.depth = depth
        self.exact = x.precision + 2 * abs(val_lower(x)) + 8

    def constant(self, c) -> Series:
        return Series.monomial(self.p, 0, self.exact, c)

    def term(self, term: Term, env: Mapping[str, Series]) -> Series:
        if isinstance(term, Var):
            if term.name not in env:
                raise NotEvaluable(f"variable {term.name} is not bound to a value")
            return env[term.name]
        if isinstance(term, Param):
            return env["t"]
        if isinstance(term, Num):
            return self.constant(term.value)
        if isinstance(term, Add):
            values = [self.term(c, env) for c in term.children]
            result = values[0]
            for value in values[1:]:
                result = add(result, value)
            return result
        if isinstance(term, Sub):
            return sub(self.term(term.left, env), self.term(term.right, env))
        if isinstance(term, Mul):
            values = [self.term(c, env) for c in term.children]
            result = values[0]
            for value in values[1:]:
                result = mul(result, value)
            return result
        if isinstance(term, Pow):
            return power(self.term(term.base, env), term.exponent)
        raise TypeError(f"not a term: {term!r}")

    def node(self, node: Node, env: Mapping[str, Series], defs: Mapping[str, Formula]) -> EvalResult:
        if isinstance(node, Top):
            return TRUE
        if isinstance(node, Eq):
            d = sub(self.term(node.left, env), self.term(node.right, env))
            return FALSE if d.terms else _unknown("insufficient_precision")
        if isinstance(node, InO):
            value = self.term(node.term, env)
            return _settle(lambda: in_O(value))
        if isinstance(node, Not):
            return _not(self.node(node.child, env, defs))
        if isinstance(node, And):
            return _all(lambda c=c: self.node(c, env, defs) for c in node.children)
        if isinstance(node, Or):
            return _any(lambda c=c: self.node(c, env, defs) for c in node.children)
        if isinstance(node, Apply):
            return self.apply(node, env, defs)
        if isinstance(node, Exists):
            return self.exists_uniformiser(node, env, defs)
        if isinstance(node, ForAll):
            raise NotEvaluable(f"∀{node.var} ranges over an infinite domain")
        raise TypeError(f"not a formula node: {node!r}")

    def apply(self, node: Apply, env: Mapping[str, Series], defs: Mapping[str, Formula]) -> EvalResult:
        definition = defs.get(node.name)
        args = [self.term(a, env) for a in node.args]
        param = self.term(node.param, env) if node.param is not None else None
        if node.name in DECIDABLE:
            params = _template_params(self.p, definition)
            return eval_template(node.name, params, args[0], param)
        if definition is None:
            raise NotEvaluable(f"no definition for {node.name}")
        inner = dict(zip(definition.free, args))
        inner["t"] = param if param is not None else env["t"]
        return self.node(definition.body, inner, definition.definitions)

    def exists_uniformiser(self, node: Exists, env: Mapping[str, Series], defs: Mapping[str, Formula]) -> EvalResult:
        body = node.body
        first = body.children[0] if isinstance(body, And) else body
        if not (isinstance(first, Apply) and first.name == "G" and first.args == (Var(node.var),)):
            raise NotEvaluable(f"∃{node.var} is not bounded to the uniformisers")
        if self.p == 0:
            raise CharZero("enumerating uniformisers needs a finite residue field")
        K = _enumeration_length(defs)
        if K > self.depth:
            logger.info(f"∃{node.var} needs u mod t^{K}, beyond depth {self.depth}")
            return _unknown("search_depth_exhausted")
        if self.p**K > ENUMERATION_CAP:
            raise DepthCap(f"{self.p}^{K} candidates exceed the cap {ENUMERATION_CAP}")
        pending: Optional[EvalResult] = None
        p = self.p
        for lead, *rest in itertools.product(range(1, p), *([range(p)] * (K - 2))):
            u = Series.from_dict(p, {1: lead, **{j + 2: c for j, c in enumerate(rest)}}, K)
            result = self.node(body, {**env, node.var: u}, defs)
            if result.verdict == "true":
                return EvalResult(verdict="true", witness=str(u))
            if result.verdict == "unknown":
                pending = pending or result
        return pending or FALSE


def _template_params(p: int, definition: Optional[Formula]) -> TemplateParams:
    values = dict(definition.params) if definition is not None else {}
    return TemplateParams.build(
        p=p,
        l=values.get("l"),
        content=values.get("content"),
        radius=values.get("radius"),
        center=values.get("center"),
    )


def _centres(defs: Mapping[str, Formula]) -> Iterable[Tuple[int, Series]]:
    stack = list(defs.values())
    while stack:
        definition = stack.pop()
        if "center" in definition.params and definition.params["center"] is not None:
            yield definition.params["radius"], definition.params["center"]
        stack.extend(definition.definitions.values())


def _enumeration_length(defs: Mapping[str, Formula]) -> int:
    """K such that every χ under the binder depends only on u mod t^K."""
    K = 2
    for N, f in _centres(defs):
        K = max(K, N + 1 + 2 * max(0, -val_lower(f)))
    return K


def _contains_ax(formula: Formula) -> bool:
    """A″ and everything built by substitute_O carry a double prime."""
    stack = [formula]
    while stack:
        current = stack.pop()
        if current.name.endswith("″"):
            return True
        stack.extend(current.definitions.values())
    return False


def eval_formula(formula: Formula, x: Series, depth: int = SEARCH_DEPTH) -> EvalResult:
    """Truth of ``formula`` with its single free variable bound to x."""
    if _contains_ax(formula):
        raise NotEvaluable(f"{formula.name} contains Ax's formula")
    if len(formula.free) != 1:
        raise NotEvaluable(f"{formula.name} has free variables {formula.free}")
    if formula.name in DECIDABLE:
        return eval_template(formula.name, _template_params(x.characteristic, formula), x)
    evaluator = _Evaluator(x, depth)
    env = {formula.free[0]: x, "t": Series.monomial(x.characteristic, 1, evaluator.exact)}
    return evaluator.node(formula.body, env, formula.definitions)


def eval_exists_u(alpha: Formula, x: Series, depth: int = SEARCH_DEPTH) -> EvalResult:
    """∃u ∈ uniformisers, by exhaustive enumeration of u modulo t^K."""
    if not isinstance(alpha.body, Exists):
        raise NotEvaluable(f"{alpha.name} is not an ∃u formula")
    return eval_formula(alpha, x, depth)
