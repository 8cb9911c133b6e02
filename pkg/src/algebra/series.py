"""
Truncated Laurent series over F_p or Q with explicit precision.

A ``Series`` stores its nonzero coefficients below its precision P; everything
at exponents >= P is unknown. Every operation states how precision propagates
and never reports a coefficient it cannot certify.

Text grammar (characteristic p > 0):
    series := term ("+" term)* "+" "O(t^" int ")" | "O(t^" int ")"
    term   := coeff | coeff "*" mono | mono
    mono   := "t" | "t^" int
The rational mode (p = 0) also accepts "-" separators, a leading "-" and
coefficients written n/d.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Tuple, Union

from pydantic import BaseModel, Field, ValidationError

from src.algebra.field import (
    Coefficient,
    FieldElement,
    check_characteristic,
    raw_inverse,
    reduce,
)
from src.errors import (
    CharacteristicMismatch,
    CharZero,
    CoefficientOutOfRange,
    ConstantSeries,
    InsufficientPrecision,
    MissingPrecision,
    NotAPthPower,
    PrecisionExceeded,
    SeriesSyntaxError,
    ZeroInverse,
    ZeroToPrecision,
)

logger = logging.getLogger(__name__)


# ── Types ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class AtLeast:
    """Valuation of a series that is zero to precision ``bound``."""

    bound: int

    def __str__(self) -> str:
        return f">={self.bound}"


@dataclass(frozen=True)
class Series:
    characteristic: int
    terms: Tuple[Tuple[int, Coefficient], ...]
    precision: int

    @classmethod
    def from_dict(cls, p: int, mapping: Mapping[int, Coefficient], precision: int) -> "Series":
        """Normalize: reduce coefficients, drop zeros and exponents >= precision."""
        check_characteristic(p)
        items = []
        for e, c in mapping.items():
            if e >= precision:
                continue
            c = reduce(p, c)
            if c != 0:
                items.append((int(e), c))
        items.sort()
        return cls(p, tuple(items), int(precision))

    @classmethod
    def zero(cls, p: int, precision: int) -> "Series":
        return cls.from_dict(p, {}, precision)

    @classmethod
    def monomial(cls, p: int, exponent: int, precision: int, coefficient: Coefficient = 1) -> "Series":
        return cls.from_dict(p, {exponent: coefficient}, precision)

    @cached_property
    def coefficients(self) -> Dict[int, Coefficient]:
        return dict(self.terms)

    @property
    def is_empty(self) -> bool:
        return not self.terms

    @property
    def exponents(self) -> List[int]:
        return [e for e, _ in self.terms]

    def get(self, h: int) -> Coefficient:
        """Raw coefficient at ``h`` (zero when not stored); no precision check."""
        return self.coefficients.get(h, 0)

    def __str__(self) -> str:
        return to_text(self)

    def __add__(self, other: "Series") -> "Series":
        return add(self, other)

    def __sub__(self, other: "Series") -> "Series":
        return sub(self, other)

    def __mul__(self, other: "Series") -> "Series":
        return mul(self, other)

    def __neg__(self) -> "Series":
        return neg(self)


@dataclass(frozen=True)
class Ball:
    """B(N; center) = {x : v(x - center) > N}."""

    center: Series
    radius_index: int


# ── Small helpers ───────────────────────────────────────────────────────────


def _norm(p: int, c: Coefficient) -> Coefficient:
    return c % p if p else c


def same_characteristic(x: Series, y: Series) -> int:
    if x.characteristic != y.characteristic:
        raise CharacteristicMismatch(
            f"characteristics differ: {x.characteristic} vs {y.characteristic}"
        )
    return x.characteristic


def val_lower(x: Series) -> int:
    """Certified lower bound for v(x): v itself, or P when zero to precision."""
    return x.terms[0][0] if x.terms else x.precision


def valuation(x: Series) -> Union[int, AtLeast]:
    return x.terms[0][0] if x.terms else AtLeast(x.precision)


def leading_coeff(x: Series) -> FieldElement:
    if x.is_empty:
        raise ZeroToPrecision(f"series is zero to precision {x.precision}")
    return FieldElement(x.characteristic, x.terms[0][1])


def coeff(x: Series, h: int) -> FieldElement:
    if h >= x.precision:
        raise PrecisionExceeded(f"coefficient {h} is beyond O(t^{x.precision})")
    return FieldElement(x.characteristic, x.get(h))


def p_adic_order(p: int, e: int) -> int:
    """Largest l with p^l | e, for e != 0."""
    l = 0
    while e % p == 0:
        e //= p
        l += 1
    return l


def split_exponent(p: int, i: int) -> Tuple[int, int]:
    """Write i = k * p^l with p not dividing k; (k, l). Characteristic 0 gives (i, 0)."""
    if p == 0 or i == 0:
        return i, 0
    l = p_adic_order(p, i)
    return i // p**l, l


# ── Ring operations ─────────────────────────────────────────────────────────


def add(x: Series, y: Series) -> Series:
    p = same_characteristic(x, y)
    acc: Dict[int, Coefficient] = dict(x.terms)
    for e, c in y.terms:
        acc[e] = acc.get(e, 0) + c
    return Series.from_dict(p, acc, min(x.precision, y.precision))


def neg(x: Series) -> Series:
    return Series.from_dict(x.characteristic, {e: -c for e, c in x.terms}, x.precision)


def sub(x: Series, y: Series) -> Series:
    return add(x, neg(y))


def scale(x: Series, c: Coefficient) -> Series:
    """c * x for a scalar c; multiplying by a nonzero scalar keeps precision."""
    p = x.characteristic
    c = reduce(p, c.value if isinstance(c, FieldElement) else c)
    if c == 0:
        return Series.zero(p, x.precision)
    return Series.from_dict(p, {e: a * c for e, a in x.terms}, x.precision)


def shift(x: Series, k: int) -> Series:
    """t^k * x."""
    return Series(x.characteristic, tuple((e + k, c) for e, c in x.terms), x.precision + k)


def truncate(x: Series, precision: int) -> Series:
    if precision >= x.precision:
        return x
    return Series(x.characteristic, tuple((e, c) for e, c in x.terms if e < precision), precision)


def mul(x: Series, y: Series) -> Series:
    """Product with precision min(P_x + v(y), P_y + v(x))."""
    p = same_characteristic(x, y)
    vx, vy = val_lower(x), val_lower(y)
    bound = min(x.precision + vy, y.precision + vx)
    acc: Dict[int, Coefficient] = {}
    for e1, c1 in x.terms:
        if e1 + vy >= bound:
            break
        for e2, c2 in y.terms:
            e = e1 + e2
            if e >= bound:
                break
            acc[e] = acc.get(e, 0) + c1 * c2
    return Series.from_dict(p, acc, bound)


def invert(x: Series) -> Series:
    """Multiplicative inverse with precision P_x - 2 v(x)."""
    if x.is_empty:
        raise ZeroToPrecision(f"cannot invert a series that is zero to precision {x.precision}")
    p = x.characteristic
    v = x.terms[0][0]
    rel = x.precision - v
    unit = [x.get(v + j) for j in range(rel)]
    u0_inv = raw_inverse(p, unit[0])
    w: List[Coefficient] = [0] * rel
    w[0] = u0_inv
    for k in range(1, rel):
        acc: Coefficient = 0
        for j in range(1, k + 1):
            if unit[j]:
                acc += unit[j] * w[k - j]
        w[k] = _norm(p, -acc * u0_inv)
    return Series.from_dict(p, {j - v: w[j] for j in range(rel)}, x.precision - 2 * v)


def power(x: Series, k: int) -> Series:
    """x^k for any integer k; k < 0 goes through invert."""
    if k < 0:
        return invert(power(x, -k))
    if k == 0:
        return Series.monomial(x.characteristic, 0, x.precision - val_lower(x))
    result = None
    base = x
    while k:
        if k & 1:
            result = base if result is None else mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


# ── p-th power structure ────────────────────────────────────────────────────


def frobenius(x: Series, l: int) -> Series:
    """x^(p^l): exponents scale by p^l, coefficients are fixed by Frobenius on F_p."""
    p = x.characteristic
    if l == 0:
        return x
    if p == 0:
        raise CharZero("Frobenius needs a positive characteristic")
    q = p**l
    return Series(p, tuple((e * q, c) for e, c in x.terms), x.precision * q)


def pth_root(x: Series, l: int) -> Series:
    """a with a^(p^l) = x; precision ceil(P_x / p^l)."""
    p = x.characteristic
    if l == 0:
        return x
    if p == 0:
        raise CharZero("p-th roots need a positive characteristic")
    q = p**l
    bad = [e for e, _ in x.terms if e % q]
    if bad:
        raise NotAPthPower(f"exponent {bad[0]} is not divisible by {p}^{l}")
    return Series(p, tuple((e // q, c) for e, c in x.terms), -((-x.precision) // q))


def power_content(x: Series) -> int:
    """Largest l with every stored exponent divisible by p^l (0 in characteristic 0)."""
    p = x.characteristic
    if p == 0:
        return 0
    if x.is_empty:
        raise ZeroToPrecision(f"content of a series zero to precision {x.precision}")
    orders = [p_adic_order(p, e) for e, _ in x.terms if e != 0]
    if not orders:
        raise ConstantSeries("a constant is a p^l-th power for every l")
    return min(orders)


# ── Comparisons, balls, predicates ──────────────────────────────────────────


def agreement(x: Series, y: Series) -> int:
    """Exponent below which x and y are certified equal."""
    d = sub(x, y)
    return d.precision if d.is_empty else d.terms[0][0]


def equal_to_precision(x: Series, y: Series) -> bool:
    return sub(x, y).is_empty


def ball_contains(ball: Ball, x: Series) -> bool:
    N = ball.radius_index
    if min(ball.center.precision, x.precision) <= N:
        raise InsufficientPrecision(
            f"membership in B({N}; c) needs precision > {N}, have "
            f"{min(ball.center.precision, x.precision)}"
        )
    d = sub(x, ball.center)
    return d.is_empty or d.terms[0][0] > N


def in_O(x: Series) -> bool:
    if x.terms:
        return x.terms[0][0] >= 0
    if x.precision >= 0:
        return True
    raise InsufficientPrecision(f"v >= {x.precision} does not decide membership in O")


def in_M(x: Series) -> bool:
    if x.terms:
        return x.terms[0][0] >= 1
    if x.precision >= 1:
        return True
    raise InsufficientPrecision(f"v >= {x.precision} does not decide membership in M")


def is_unit(x: Series) -> bool:
    if x.terms:
        return x.terms[0][0] == 0
    if x.precision >= 1:
        return False
    raise InsufficientPrecision(f"v >= {x.precision} does not decide membership in O^x")


def is_uniformiser(x: Series) -> bool:
    if x.terms:
        return x.terms[0][0] == 1
    if x.precision >= 2:
        return False
    raise InsufficientPrecision(f"v >= {x.precision} does not decide v = 1")


# ── Text form ───────────────────────────────────────────────────────────────

_TAIL = re.compile(r"O\(t(?:\^([+-]?\d+))?\)$")
_TERM = re.compile(
    r"(?P<sign>[+-])?"
    r"(?:(?P<coeff>\d+(?:/\d+)?)(?P<mono>\*t(?:\^(?P<exp>[+-]?\d+))?)?"
    r"|(?P<bare>t)(?:\^(?P<bexp>[+-]?\d+))?)"
)


def _read_coefficient(text: str, p: int) -> Coefficient:
    if "/" in text:
        if p != 0:
            raise SeriesSyntaxError(f"fraction {text!r} is only accepted in characteristic 0")
        num, den = text.split("/")
        if int(den) == 0:
            raise CoefficientOutOfRange(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return int(text)


def parse(text: str, p: int) -> Series:
    """Read the text grammar; the ``O(t^P)`` tail is mandatory."""
    check_characteristic(p)
    compact = re.sub(r"\s+", "", text)
    tail = _TAIL.search(compact)
    if tail is None:
        if "O(" in compact:
            raise SeriesSyntaxError(f"malformed precision term in {text!r}")
        raise MissingPrecision(f"missing O(t^P) in {text!r}")
    precision = int(tail.group(1)) if tail.group(1) is not None else 1
    head = compact[: tail.start()]
    terms: Dict[int, Coefficient] = {}
    if head:
        if not head.endswith("+") or head == "+":
            raise SeriesSyntaxError(f"expected terms joined by '+' before O(...) in {text!r}")
        head = head[:-1]
        pos = 0
        while pos < len(head):
            m = _TERM.match(head, pos)
            if m is None or m.end() == pos:
                raise SeriesSyntaxError(f"unexpected input {head[pos:]!r} in {text!r}")
            sign = m.group("sign")
            if pos == 0 and sign == "+":
                raise SeriesSyntaxError(f"leading '+' in {text!r}")
            if pos > 0 and sign is None:
                raise SeriesSyntaxError(f"missing '+' before {head[pos:]!r}")
            if sign == "-" and p != 0:
                raise SeriesSyntaxError("'-' is only accepted in characteristic 0")
            if m.group("bare"):
                value: Coefficient = 1
                exponent = int(m.group("bexp")) if m.group("bexp") is not None else 1
            else:
                value = _read_coefficient(m.group("coeff"), p)
                if m.group("mono") is None:
                    exponent = 0
                elif m.group("exp") is not None:
                    exponent = int(m.group("exp"))
                else:
                    exponent = 1
            if exponent >= precision:
                raise CoefficientOutOfRange(
                    f"term t^{exponent} lies beyond O(t^{precision})"
                )
            if sign == "-":
                value = -value
            terms[exponent] = terms.get(exponent, 0) + value
            pos = m.end()
    try:
        return Series.from_dict(p, terms, precision)
    except ZeroInverse as e:
        raise CoefficientOutOfRange(str(e)) from e


def to_text(x: Series) -> str:
    """Canonical form: ascending exponents and an explicit O(t^P) tail."""
    parts: List[str] = []
    for e, c in x.terms:
        negative = x.characteristic == 0 and c < 0
        magnitude = -c if negative else c
        mono = "" if e == 0 else "t" if e == 1 else f"t^{e}"
        if not mono:
            body = str(magnitude)
        elif magnitude == 1:
            body = mono
        else:
            body = f"{magnitude}*{mono}"
        if not parts:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f" - {body}" if negative else f" + {body}")
    tail = f"O(t^{x.precision})"
    return "".join(parts) + (" + " if parts else "") + tail


# ── JSON form ───────────────────────────────────────────────────────────────


class SeriesPayload(BaseModel):
    """JSON form of a series."""

    p: int = Field(description="Characteristic; 0 selects the rational mode")
    terms: List[Tuple[int, Union[int, str]]] = Field(
        default_factory=list,
        description="[exponent, coefficient] pairs with strictly increasing exponents",
    )
    prec: int = Field(description="Precision P: coefficients below t^P are known")


def to_payload(x: Series) -> SeriesPayload:
    terms: List[Tuple[int, Union[int, str]]] = []
    for e, c in x.terms:
        if isinstance(c, Fraction):
            terms.append((e, int(c) if c.denominator == 1 else str(c)))
        else:
            terms.append((e, c))
    return SeriesPayload(p=x.characteristic, terms=terms, prec=x.precision)


def to_json(x: Series) -> str:
    return to_payload(x).model_dump_json()


def from_payload(payload: SeriesPayload) -> Series:
    exponents = [e for e, _ in payload.terms]
    if any(b <= a for a, b in zip(exponents, exponents[1:])):
        raise SeriesSyntaxError("JSON exponents must be strictly increasing")
    p = check_characteristic(payload.p)
    mapping: Dict[int, Coefficient] = {}
    for e, c in payload.terms:
        if e >= payload.prec:
            raise CoefficientOutOfRange(f"term t^{e} lies beyond O(t^{payload.prec})")
        mapping[e] = _read_coefficient(c, p) if isinstance(c, str) else c
    try:
        return Series.from_dict(p, mapping, payload.prec)
    except ZeroInverse as e:
        raise CoefficientOutOfRange(str(e)) from e


def from_json(text: str) -> Series:
    try:
        payload = SeriesPayload.model_validate_json(text)
    except ValidationError as e:
        raise SeriesSyntaxError(f"invalid series JSON: {e.errors()[0]['msg']}") from e
    return from_payload(payload)
