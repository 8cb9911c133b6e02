"""
Builders for the definable-set templates and the orbit formulas.

Ring language with parameter t (l a prime different from p):

    A(x;t) := ∃y. 1 + x^l*t = y^l                      valuation ring
    B(x;t) := ¬∃z. (x*z*t = 1 ∧ A(z;t))                 valuation ring
    C(x;t), D(x;t)                                     maximal ideal
    E(x;t), F(x;t)                                     units
    G(x;t), H(x;t)                                     uniformisers

Valued-field language: C′, D′, E′, F′, H′ use the atom O(x) in place of A.
Ring language without t: A″(x) (Ax) defines the valuation ring; substitute_O
turns the primed templates into C″, D″, E″, F″, H″.

Orbit formulas for a scalar a with bound (l, N) and centre f:

    ψ(y)   := ∃w. w^(p^l) = y
    χ(x;t) := ∃y1 ... ∃y(N+1). (x - f = y1*...*y(N+1) ∧ C(y1;t) ∧ ...)
    α(x;t) := ∃u. (G(u;t) ∧ χ(x;u))
    β(x;t) := ⊤ ∧ ψ(x) ∧ α(x;t)
    γ(x)   := ∃v. (H″(v) ∧ β(x;v))
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.algebra.field import is_prime, least_prime_other_than
from src.algebra.series import Series, truncate
from src.errors import BadParams, InsufficientPrecision
from src.formulas.ast import (
    Apply,
    Eq,
    Formula,
    InO,
    Node,
    Not,
    Num,
    Param,
    Sub,
    Term,
    Top,
    Var,
    add,
    all_variables,
    applied_names,
    conj,
    disj,
    exists,
    forall,
    fresh_namer,
    map_node,
    mul,
    pow_,
    rename_bound,
    substitute_term,
)
from src.orbits.orbit import nearly_open_bound

logger = logging.getLogger(__name__)

RING_T_TEMPLATES = ("A", "B", "C", "D", "E", "F", "G", "H")
VF_TEMPLATES = ("C′", "D′", "E′", "F′", "H′")
ALIASES = {"psi": "ψ", "chi": "χ", "alpha": "α", "beta": "β", "gamma": "γ"}

x, y, z, u, v, w = (Var(name) for name in "xyzuvw")
t = Param()
ZERO, ONE = Num(0), Num(1)


class TemplateParams(BaseModel):
    """Parameters shared by the template builders."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: int = Field(default=2, ge=0, description="Characteristic; 0 selects the rational mode")
    l: int = Field(description="Robinson prime; default the least prime != p")
    m: int = Field(description="Exponent of the Ax formula; default l")
    content: int = Field(default=0, ge=0, description="p^content is the exponent of ψ")
    radius: Optional[int] = Field(default=None, description="Radius index N of χ")
    center: Optional[Series] = Field(default=None, description="Centre f of χ")

    @model_validator(mode="before")
    @classmethod
    def _defaults(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            p = data.get("p", 2)
            if data.get("l") is None and isinstance(p, int) and p >= 0:
                data["l"] = least_prime_other_than(p)
            if data.get("m") is None:
                data["m"] = data.get("l")
        return data

    @model_validator(mode="after")
    def _check(self) -> "TemplateParams":
        if self.p != 0 and not is_prime(self.p):
            raise ValueError(f"p must be 0 or a prime, got {self.p}")
        if not is_prime(self.l) or self.l == self.p:
            raise ValueError(f"l must be a prime different from p = {self.p}, got {self.l}")
        if self.m < 2 or (self.p and self.m % self.p == 0):
            raise ValueError(f"m must be at least 2 and prime to p, got {self.m}")
        return self

    @classmethod
    def build(cls, **values) -> "TemplateParams":
        try:
            return cls(**{k: val for k, val in values.items() if val is not None})
        except ValidationError as e:
            raise BadParams(e.errors()[0]["msg"]) from e

    @property
    def power(self) -> int:
        """p^content (1 in characteristic 0)."""
        return self.p**self.content if self.p else 1


def canonical_name(name: str) -> str:
    name = ALIASES.get(name, name)
    return name.replace("''", "″").replace("'", "′")


# ── Ring language with t ────────────────────────────────────────────────────


def _ring_t(name: str, body: Node, params: TemplateParams, *uses: Formula) -> Formula:
    return Formula(
        name=name,
        body=body,
        free=("x",),
        language="ring_t",
        params={"l": params.l},
        definitions={f.name: f for f in uses},
    )


def _ring_t_template(name: str, params: TemplateParams) -> Formula:
    l = params.l
    if name == "A":
        return _ring_t("A", exists("y", Eq(add(ONE, mul(pow_(x, l), t)), pow_(y, l))), params)
    A = _ring_t_template("A", params)
    if name == "B":
        body = Not(exists("z", conj(Eq(mul(x, z, t), ONE), Apply("A", (z,), t))))
        return _ring_t("B", body, params, A)
    if name == "C":
        B = _ring_t_template("B", params)
        body = exists("y", disj(Eq(x, ZERO), conj(Eq(mul(x, y), ONE), Not(Apply("B", (y,), t)))))
        return _ring_t("C", body, params, B)
    if name == "D":
        body = Not(exists("y", conj(Eq(mul(x, y), ONE), Apply("A", (y,), t))))
        return _ring_t("D", body, params, A)
    if name == "E":
        body = exists("y", conj(Apply("A", (x,), t), Apply("A", (y,), t), Eq(mul(x, y), ONE)))
        return _ring_t("E", body, params, A)
    if name == "F":
        C = _ring_t_template("C", params)
        body = Not(exists("y", disj(Apply("C", (x,), t), conj(Eq(mul(y, x), ONE), Apply("C", (y,), t)))))
        return _ring_t("F", body, params, C)
    if name == "G":
        E = _ring_t_template("E", params)
        return _ring_t("G", exists("y", conj(Apply("E", (y,), t), Eq(x, mul(y, t)))), params, E)
    if name == "H":
        C, D = _ring_t_template("C", params), _ring_t_template("D", params)
        body = forall(
            "y z",
            conj(
                Apply("D", (x,), t),
                Not(conj(Eq(x, mul(y, z)), Apply("C", (y,), t), Apply("C", (z,), t))),
            ),
        )
        return _ring_t("H", body, params, D, C)
    raise BadParams(f"unknown template {name!r}")


# ── Valued-field language ───────────────────────────────────────────────────


def _vf(name: str, body: Node, *uses: Formula) -> Formula:
    return Formula(name=name, body=body, free=("x",), language="vf", definitions={f.name: f for f in uses})


def _vf_template(name: str) -> Formula:
    if name == "C′":
        return _vf(name, exists("y", disj(Eq(x, ZERO), conj(Eq(mul(x, y), ONE), Not(InO(y))))))
    if name == "D′":
        return _vf(name, Not(exists("y", conj(Eq(mul(x, y), ONE), InO(y)))))
    if name == "E′":
        return _vf(name, exists("y", conj(InO(x), InO(y), Eq(mul(x, y), ONE))))
    C1 = _vf_template("C′")
    if name == "F′":
        body = Not(exists("y", disj(Apply("C′", (x,)), conj(Eq(mul(y, x), ONE), Apply("C′", (y,))))))
        return _vf(name, body, C1)
    if name == "H′":
        body = forall(
            "y z",
            conj(
                Apply("D′", (x,)),
                Not(conj(Eq(x, mul(y, z)), Apply("C′", (y,)), Apply("C′", (z,)))),
            ),
        )
        return _vf(name, body, _vf_template("D′"), C1)
    raise BadParams(f"unknown template {name!r}")


# ── Ax's formula and substitute_O ───────────────────────────────────────────


def ax_template(m: int) -> Formula:
    """A″(x): the valuation ring in the ring language without t."""
    x1, x2, y1, y2 = Var("x1"), Var("x2"), Var("y1"), Var("y2")
    wm = lambda *factors: mul(w, *(pow_(f, m) for f in factors))  # noqa: E731
    matrix = conj(
        disj(
            Eq(pow_(z, m), add(ONE, wm(x1, x2))),
            Not(Eq(pow_(y1, m), add(ONE, wm(x1)))),
            Not(Eq(pow_(y2, m), add(ONE, wm(x2)))),
        ),
        Not(Eq(pow_(u, m), w)),
        Eq(pow_(y, m), add(ONE, wm(x))),
    )
    body = exists("w y", forall("u x1 x2", exists("z", forall("y1 y2", matrix))))
    return Formula(name="A″", body=body, free=("x",), language="ring", params={"m": m})


def _double_prime(name: str) -> str:
    return name.replace("′", "″") if name.endswith("′") else name


def substitute_O(formula: Formula, m: int) -> Formula:
    """Replace every atom O(term) by A″(term) with fresh bound variables."""
    if formula.language != "vf":
        return formula
    ax = ax_template(m)
    fresh = fresh_namer(all_variables(formula.body) + all_variables(ax.body))

    def on_node(node: Node) -> Optional[Node]:
        if isinstance(node, InO):
            body = rename_bound(ax.body, fresh)
            return map_node(body, lambda term: substitute_term(term, {"x": node.term}))
        if isinstance(node, Apply):
            return Apply(_double_prime(node.name), node.args, node.param)
        return None

    body = map_node(formula.body, lambda term: term, on_node)
    definitions = {
        _double_prime(name): substitute_O(definition, m) for name, definition in formula.definitions.items()
    }
    return Formula(
        name=_double_prime(formula.name),
        body=body,
        free=formula.free,
        language="ring",
        params={**formula.params, "m": m},
        definitions=definitions,
    )


# ── Public builder ──────────────────────────────────────────────────────────


def template(name: str, params: Optional[TemplateParams] = None) -> Formula:
    """The named template. Accepts ASCII spellings C', A'', psi, chi."""
    params = params or TemplateParams.build()
    name = canonical_name(name)
    if name in RING_T_TEMPLATES:
        return _ring_t_template(name, params)
    if name in VF_TEMPLATES:
        return _vf_template(name)
    if name == "A″":
        return ax_template(params.m)
    if name.endswith("″") and name.replace("″", "′") in VF_TEMPLATES:
        return substitute_O(_vf_template(name.replace("″", "′")), params.m)
    if name == "ψ":
        return psi_template(params)
    if name == "χ":
        if params.radius is None or params.center is None:
            raise BadParams("χ needs a radius and a centre")
        return chi_template(params.radius, params.center, params)
    raise BadParams(f"unknown template {name!r}")


def psi_template(params: TemplateParams) -> Formula:
    return Formula(
        name="ψ",
        body=exists("w", Eq(pow_(w, params.power), y)),
        free=("y",),
        language="ring",
        params={"content": params.content, "power": params.power},
    )


def series_term(f: Series) -> Term:
    """A truncated series as a polynomial term in t (and t^-1)."""
    if f.is_empty:
        return ZERO
    pieces = []
    for e, c in f.terms:
        negative = f.characteristic == 0 and c < 0
        magnitude = Fraction(-c if negative else c)
        coeff = Num(int(magnitude) if magnitude.denominator == 1 else magnitude)
        if e == 0:
            piece: Term = coeff
        elif magnitude == 1:
            piece = pow_(t, e)
        else:
            piece = mul(coeff, pow_(t, e))
        pieces.append((negative, piece))
    first_negative, node = pieces[0]
    if first_negative:
        node = Sub(ZERO, node)
    positives = [node]
    for negative, piece in pieces[1:]:
        if negative:
            node = Sub(add(*positives), piece)
            positives = [node]
        else:
            positives.append(piece)
    return add(*positives)


def chi_template(N: int, f: Series, params: TemplateParams) -> Formula:
    """v(x - f) >= N + 1, as a product of N + 1 elements of the maximal ideal."""
    C = _ring_t_template("C", params)
    difference = Sub(x, series_term(f))
    if N + 1 <= 0:
        body: Node = Apply("C", (mul(pow_(t, -N), difference) if N else difference,), t)
    else:
        names = [f"y{k}" for k in range(1, N + 2)]
        factors = [Var(name) for name in names]
        body = exists(
            " ".join(names),
            conj(Eq(difference, mul(*factors)), *(Apply("C", (factor,), t) for factor in factors)),
        )
    return Formula(
        name="χ",
        body=body,
        free=("x",),
        language="ring_t",
        params={"radius": N, "center": f},
        definitions={"C": C},
    )


# ── Orbit formulas ──────────────────────────────────────────────────────────


def emit_orbit_formula_scalar(a: Series, n: int, l: Optional[int] = None) -> Formula:
    """β(x;t): x ∈ Orb(a), for a transcendental over the constants.

    Transcendence of a is the caller's assumption; no truncation certifies it.
    """
    bound = nearly_open_bound(a, n)
    if a.precision <= bound.N:
        raise InsufficientPrecision(f"centre needs precision > {bound.N}, have {a.precision}")
    params = TemplateParams.build(p=a.characteristic, l=l, content=bound.l)
    f = truncate(a, bound.N + 1)
    psi = psi_template(params)
    chi = chi_template(bound.N, f, params)
    G = _ring_t_template("G", params)
    alpha = Formula(
        name="α",
        body=exists("u", conj(Apply("G", (u,), t), Apply("χ", (x,), u))),
        free=("x",),
        language="ring_t",
        params={"radius": bound.N},
        definitions={"G": G, "χ": chi},
    )
    logger.debug(f"emitted β for {a} with l={bound.l}, N={bound.N}")
    return Formula(
        name="β",
        body=conj(Top(), Apply("ψ", (x,)), Apply("α", (x,), t)),
        free=("x",),
        language="ring_t",
        params={"l": params.l, "content": bound.l, "radius": bound.N, "center": f, "n": n},
        definitions={"ψ": psi, "α": alpha},
    )


def emit_orbit_formula_ring(a: Series, n: int, l: Optional[int] = None, m: Optional[int] = None) -> Formula:
    """γ(x) := ∃v. (H″(v) ∧ β(x;v)); printed, never evaluated."""
    beta = emit_orbit_formula_scalar(a, n, l)
    params = TemplateParams.build(p=a.characteristic, l=l, m=m)
    H2 = substitute_O(_vf_template("H′"), params.m)
    return Formula(
        name="γ",
        body=exists("v", conj(Apply("H″", (v,)), Apply("β", (x,), v))),
        free=("x",),
        language="ring",
        params={**beta.params, "m": params.m},
        definitions={"H″": H2, "β": beta},
    )


def referenced(formula: Formula) -> Dict[str, Formula]:
    """Every definition reachable from ``formula``, by name."""
    found: Dict[str, Formula] = {}
    stack = [formula]
    while stack:
        current = stack.pop()
        for name in applied_names(current.body):
            definition = current.definitions.get(name)
            if definition is not None and name not in found:
                found[name] = definition
                stack.append(definition)
    return found

