"""
Exact coefficient arithmetic for F_p (p prime) and the rational mode (p = 0).

Coefficients are stored "raw" inside series: an ``int`` in ``[0, p)`` when
p > 0 and a ``fractions.Fraction`` when p = 0. ``FieldElement`` wraps a raw
coefficient together with its characteristic for the public API.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Optional, Union

from sympy import integer_nthroot

from src.errors import BadModulus, CharacteristicMismatch, NotAPower, ZeroInput, ZeroInverse

logger = logging.getLogger(__name__)

Coefficient = Union[int, Fraction]


# ── Characteristic checks ───────────────────────────────────────────────────


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Trial division; moduli here are desk-scale."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_characteristic(p: int) -> int:
    if not isinstance(p, int) or p < 0 or (p != 0 and not is_prime(p)):
        raise BadModulus(f"characteristic must be 0 or a prime, got {p!r}")
    return p


def least_prime_other_than(p: int) -> int:
    """Least prime different from ``p`` (2, or 3 when p = 2)."""
    q = 2
    while q == p or not is_prime(q):
        q += 1
    return q


# ── Raw coefficient helpers ─────────────────────────────────────────────────


def reduce(p: int, value: Coefficient) -> Coefficient:
    """Canonical raw form of ``value`` in characteristic ``p``."""
    if p == 0:
        return Fraction(value)
    if isinstance(value, Fraction):
        if value.denominator % p == 0:
            raise ZeroInverse(f"denominator {value.denominator} vanishes mod {p}")
        return value.numerator * pow(value.denominator, -1, p) % p
    return int(value) % p


def raw_inverse(p: int, c: Coefficient) -> Coefficient:
    if c == 0:
        raise ZeroInverse("0 has no inverse")
    if p == 0:
        return 1 / Fraction(c)
    return pow(c, -1, p)


def rational_root(q: Fraction, l: int) -> Optional[Fraction]:
    """Exact l-th root of a rational, or None. Even l picks the positive root."""
    q = Fraction(q)
    if q == 0:
        return Fraction(0)
    if q < 0 and l % 2 == 0:
        return None
    num, num_exact = integer_nthroot(abs(q.numerator), l)
    den, den_exact = integer_nthroot(q.denominator, l)
    if not (num_exact and den_exact):
        return None
    root = Fraction(int(num), int(den))
    return -root if q < 0 else root


# ── FieldElement ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class FieldElement:
    characteristic: int
    value: Coefficient

    def __post_init__(self) -> None:
        check_characteristic(self.characteristic)
        object.__setattr__(self, "value", reduce(self.characteristic, self.value))

    @classmethod
    def zero(cls, p: int) -> "FieldElement":
        return cls(p, 0)

    @classmethod
    def one(cls, p: int) -> "FieldElement":
        return cls(p, 1)

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.characteristic != self.characteristic:
                raise CharacteristicMismatch(
                    f"characteristics differ: {self.characteristic} vs {other.characteristic}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.characteristic, other)
        return NotImplemented

    def _wrap(self, raw: Coefficient) -> "FieldElement":
        return FieldElement(self.characteristic, raw)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self.value - other.value)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(other.value - self.value)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self.value * other.value)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * inv(other)

    def __neg__(self) -> "FieldElement":
        return self._wrap(-self.value)

    def __pow__(self, e: int) -> "FieldElement":
        if e < 0:
            return inv(self) ** (-e)
        if self.characteristic:
            return self._wrap(pow(self.value, e, self.characteristic))
        return self._wrap(self.value**e)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.characteristic == other.characteristic and self.value == other.value
        if isinstance(other, (int, Fraction)):
            try:
                return self.value == reduce(self.characteristic, other)
            except ZeroInverse:
                return False
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.characteristic, self.value))

    def __int__(self) -> int:
        if self.characteristic == 0 and self.value.denominator != 1:
            raise TypeError(f"{self.value} is not an integer")
        return int(self.value)

    def __str__(self) -> str:
        return str(self.value)


# ── Operations ──────────────────────────────────────────────────────────────


def inv(a: FieldElement) -> FieldElement:
    if a.is_zero:
        raise ZeroInverse(f"0 has no inverse in characteristic {a.characteristic}")
    return FieldElement(a.characteristic, raw_inverse(a.characteristic, a.value))


def power_residue(a: FieldElement, m: int) -> bool:
    """True iff a lies in (F_p^x)^m. Any m >= 1 is allowed, including p | m."""
    p = a.characteristic
    if a.is_zero:
        raise ZeroInput("0 is not in the multiplicative group")
    if m < 1:
        raise BadModulus(f"exponent must be positive, got {m}")
    if p == 0:
        return rational_root(a.value, m) is not None
    return pow(a.value, (p - 1) // gcd(m, p - 1), p) == 1


def is_lth_power(a: FieldElement, l: int) -> bool:
    """Decide b^l = a for some nonzero b; the test a^((p-1)/gcd(l, p-1)) = 1."""
    p = a.characteristic
    if l < 1:
        raise BadModulus(f"l must be positive, got {l}")
    if p and l % p == 0:
        raise BadModulus(f"l = {l} shares a factor with p = {p}")
    return power_residue(a, l)


def lth_root(a: FieldElement, l: int) -> FieldElement:
    """Smallest residue b with b^l = a (positive root in the rational mode)."""
    p = a.characteristic
    if a.is_zero:
        raise ZeroInput("root of 0 is not taken")
    if p == 0:
        root = rational_root(a.value, l)
        if root is None:
            raise NotAPower(f"{a} is not an {l}-th power in Q")
        return FieldElement(0, root)
    for b in range(1, p):
        if pow(b, l, p) == a.value:
            return FieldElement(p, b)
    raise NotAPower(f"{a} is not an {l}-th power mod {p}")
