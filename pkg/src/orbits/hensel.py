"""
Hensel-like solver for f(y) = b with y in t + M^n.

Given f in F[[t]] that is not a p-th power, let i0 be its least support
exponent prime to p and N' = ceil(max_{0<=k<i0} (i0 - k) / (1 - 1/p)). For
H > N' the coefficient C_H(f∘y) depends on y_{H-i0+1} only through the
linear term a_i0 * i0 * y_{H-i0+1}, and on no later coefficient. The solver
starts from y = t and fixes one coefficient per step.

Characteristic 0 uses i0 = least support exponent >= 1 and N' = 0.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import List

from src.algebra.compose import compose_truncated
from src.algebra.field import Coefficient, raw_inverse
from src.algebra.series import Series, same_characteristic, sub
from src.errors import (
    ConstantSeries,
    InsufficientPrecision,
    IsPthPower,
    NotInValuationRing,
    OutsideBall,
)
from src.orbits.models import HenselData

logger = logging.getLogger(__name__)


def _require_valuation_ring(f: Series) -> None:
    if f.is_empty:
        if f.precision < 0:
            raise InsufficientPrecision(f"v(f) >= {f.precision} does not place f in F[[t]]")
        return
    if f.terms[0][0] < 0:
        raise NotInValuationRing(f"v(f) = {f.terms[0][0]} < 0")


def compute_i0(f: Series) -> int:
    _require_valuation_ring(f)
    p = f.characteristic
    if p == 0:
        for i, _ in f.terms:
            if i >= 1:
                return i
        raise ConstantSeries(f"{f} is constant to precision {f.precision}")
    for i, _ in f.terms:
        if i % p:
            return i
    raise IsPthPower(
        f"every exponent of {f} is divisible by {p} (certified only to precision {f.precision})"
    )


def compute_Nprime(f: Series) -> int:
    i0 = compute_i0(f)
    p = f.characteristic
    if p == 0:
        return 0
    shrink = 1 - Fraction(1, p)
    return math.ceil(max(Fraction(i0 - k) / shrink for k in range(i0)))


def hensel_data(f: Series, n: int) -> HenselData:
    """Constants for f and level n. Level 1 means the full group and is solved at level 2."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    i0 = compute_i0(f)
    n_prime = compute_Nprime(f)
    N = max(n_prime, max(n, 2) + i0 - 2)
    return HenselData(i0=i0, Nprime=n_prime, N=N, n=n)


def solve(f: Series, n: int, b: Series) -> Series:
    """y in t + M^max(n,2) with f∘y = b, for b in B(N; f).

    The result has precision min(P_b, P_f) - i0 + 1.
    """
    p = same_characteristic(f, b)
    data = hensel_data(f, n)
    i0, N = data.i0, data.N
    top = min(b.precision, f.precision)
    if top <= N:
        raise InsufficientPrecision(f"need precision > {N} to certify v(b - f) > {N}, have {top}")
    diff = sub(b, f)
    if diff.terms and diff.terms[0][0] <= N:
        raise OutsideBall(f"v(b - f) = {diff.terms[0][0]} <= N = {N}")

    a_i0 = f.get(i0)
    pivot = a_i0 * i0
    if p:
        pivot %= p
    assert pivot != 0, "a_i0 * i0 must be invertible"
    pivot_inv = raw_inverse(p, pivot)

    y: List[Coefficient] = [0] * (top - i0 + 1)
    y[1] = 1
    for H in range(N + 1, top):
        m = H - i0 + 1
        image = compose_truncated(f.terms, y, H + 1, p)
        step = (b.get(H) - image[H]) * pivot_inv
        y[m] = step % p if p else step
    logger.debug(f"solved f∘y = b for H in ({N}, {top}) with i0={i0}")
    return Series.from_dict(p, dict(enumerate(y)), top - i0 + 1)
