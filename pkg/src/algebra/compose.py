"""
Substitution t -> s and the group of uniformisers under composition.

f∘s is evaluated from the powers s, s^2, ... truncated at the declared
precision. The precision itself comes from the decomposition i = k * p^l of
each support exponent: perturbing s at order P_s moves s^i only from order
p^l (k - 1 + P_s) on, for negative k too. Laurent f is handled as s^v(f) * (g∘s)
with g = t^-v(f) f.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from src.algebra.field import Coefficient, raw_inverse
from src.algebra.series import (
    Series,
    invert,
    mul,
    power,
    same_characteristic,
    shift,
    split_exponent,
)
from src.errors import InsufficientPrecision, NotAUniformiser, NotInMaximalIdeal

logger = logging.getLogger(__name__)


# ── Uniformiser ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Uniformiser:
    """Element of value exactly 1; substitution t -> body."""

    body: Series

    def __post_init__(self) -> None:
        body = self.body
        if body.is_empty or body.terms[0][0] != 1:
            raise NotAUniformiser(f"{body} does not have valuation 1")
        if body.precision < 2:
            raise NotAUniformiser(f"{body} needs precision >= 2")

    @classmethod
    def identity(cls, p: int, precision: int) -> "Uniformiser":
        return cls(Series.monomial(p, 1, precision))

    @classmethod
    def scalar(cls, p: int, c: Coefficient, precision: int) -> "Uniformiser":
        """The substitution t -> c t."""
        return cls(Series.monomial(p, 1, precision, c))

    @property
    def characteristic(self) -> int:
        return self.body.characteristic

    @property
    def precision(self) -> int:
        return self.body.precision

    def __str__(self) -> str:
        return str(self.body)


# ── Dense kernels ───────────────────────────────────────────────────────────


def dense(x: Series, bound: int) -> List[Coefficient]:
    """Coefficients 0..bound-1 of a series with v >= 0; unknown ones read as 0."""
    out: List[Coefficient] = [0] * max(bound, 0)
    for e, c in x.terms:
        if e >= bound:
            break
        out[e] = c
    return out


def _mul_dense(a: Sequence[Coefficient], s: Sequence[Coefficient], bound: int, p: int, lo: int) -> List[Coefficient]:
    """a * s below ``bound`` where v(a) >= lo and s[0] = 0."""
    out: List[Coefficient] = [0] * bound
    for j in range(lo, bound - 1):
        aj = a[j]
        if not aj:
            continue
        for k in range(1, bound - j):
            sk = s[k]
            if sk:
                out[j + k] += aj * sk
    if p:
        out = [c % p for c in out]
    return out


def compose_truncated(
    f_terms: Sequence[Tuple[int, Coefficient]], s: Sequence[Coefficient], bound: int, p: int
) -> List[Coefficient]:
    """Raw coefficients of f∘s below ``bound``, for v(f) >= 0 and v(s) >= 1."""
    if bound <= 0:
        return []
    s = list(s[:bound]) + [0] * (bound - len(s))
    wanted = {e: c for e, c in f_terms if e < bound}
    result: List[Coefficient] = [0] * bound
    if 0 in wanted:
        result[0] += wanted[0]
    top = max(wanted, default=0)
    pw = list(s)
    for i in range(1, top + 1):
        c = wanted.get(i)
        if c:
            for j in range(i, bound):
                if pw[j]:
                    result[j] += c * pw[j]
        if i < top:
            pw = _mul_dense(pw, s, bound, p, lo=i)
    if p:
        result = [c % p for c in result]
    return result


# ── Composition ─────────────────────────────────────────────────────────────


def composition_precision(f: Series, s_precision: int, s_valuation: int = 1) -> int:
    """min(P_f, min over support i != 0 of p^l (m (k - 1) + P_s)) for v(s) = m.

    Holds for negative i as well: s^k = t^(mk) * (s / t^m)^k and the unit
    s / t^m is known to relative precision P_s - m.
    """
    p = f.characteristic
    m = s_valuation
    bound = f.precision if f.precision >= 0 else m * f.precision
    for i, _ in f.terms:
        if i == 0:
            continue
        k, l = split_exponent(p, i)
        bound = min(bound, (p**l if p else 1) * (m * (k - 1) + s_precision))
    return bound


def _as_series(s: Union[Series, Uniformiser]) -> Series:
    return s.body if isinstance(s, Uniformiser) else s


def _compose_laurent(f: Series, s: Series, bound: int) -> Series:
    """f∘s = s^v * (g∘s) with g = t^-v f, on the zero-padded lift of s."""
    p = f.characteristic
    v = f.terms[0][0]
    m = s.terms[0][0]
    length = bound - m * v
    if length <= 0:
        return Series.from_dict(p, {}, bound)
    lift = Series.from_dict(p, {e: c for e, c in s.terms if e < length + m}, length + m)
    g_terms = tuple((e - v, c) for e, c in f.terms)
    h = Series.from_dict(p, dict(enumerate(compose_truncated(g_terms, dense(lift, length), length, p))), length)
    unit_power = power(invert(shift(lift, -m)), -v)
    return shift(mul(unit_power, h), m * v)


def compose(f: Series, s: Union[Series, Uniformiser]) -> Series:
    """f∘s for v(s) >= 1, to the precision given by composition_precision."""
    s = _as_series(s)
    p = same_characteristic(f, s)
    if s.is_empty:
        raise InsufficientPrecision(f"substituted series is zero to precision {s.precision}")
    m = s.terms[0][0]
    if m < 1:
        raise NotInMaximalIdeal(f"v(s) = {m} < 1")
    bound = composition_precision(f, s.precision, m)
    if f.terms and f.terms[0][0] < 0:
        return _compose_laurent(f, s, bound)
    coeffs = compose_truncated(f.terms, dense(s, bound), bound, p)
    return Series.from_dict(p, dict(enumerate(coeffs)), bound)


def act(sigma: Uniformiser, x: Series) -> Series:
    """The automorphism x -> x∘sigma."""
    return compose(x, sigma.body)


def group_compose(s: Uniformiser, u: Uniformiser) -> Uniformiser:
    """s∘u, the group law on uniformisers."""
    return Uniformiser(compose(s.body, u.body))


def group_inverse(s: Uniformiser) -> Uniformiser:
    """u with u∘s = s∘u = t to precision P_s.

    Solves the triangular system sum_{i<=j} u_i C_j(s^i) = [j = 1] one
    coefficient at a time; the diagonal entries are c_1^j.
    """
    p = s.characteristic
    P = s.precision
    sd = dense(s.body, P)
    powers: List[List[Coefficient]] = [[], sd]
    for i in range(2, P):
        powers.append(_mul_dense(powers[-1], sd, P, p, lo=i - 1))
    u: List[Coefficient] = [0] * P
    for j in range(1, P):
        acc: Coefficient = 0
        for i in range(1, j):
            if u[i] and powers[i][j]:
                acc += u[i] * powers[i][j]
        target = 1 if j == 1 else 0
        u[j] = (target - acc) * raw_inverse(p, powers[j][j])
        if p:
            u[j] %= p
    logger.debug(f"reverted uniformiser to precision {P}")
    return Uniformiser(Series.from_dict(p, dict(enumerate(u)), P))
