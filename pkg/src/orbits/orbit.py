"""
Orbits of truncated series under the substitution group.

Orb_n(a) is the set of a∘s for s in t + M^n; level n = 1 denotes the full
group of uniformisers. This module provides:
  - seeded sampling of substitutions and orbit points,
  - the ball radii of the nearly-open containment B(N; b) ∩ F((t))^(p^l) ⊆ Orb_n(b)
    and witnesses for it,
  - the continuity level n with Orb_n(c) ⊆ B(N; c),
  - a three-valued membership test and an exhaustive brute-force oracle.

Membership never returns NotInOrbit from a failed search: only invariants
that hold for every point of an orbit (valuation, the first exponent of
least p-adic order and its coefficient, constant term, continuity radius)
can reject.
"""

from __future__ import annotations

import itertools
import logging
import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from src.algebra.compose import Uniformiser, compose
from src.algebra.field import Coefficient, raw_inverse, rational_root
from src.algebra.series import (
    Ball,
    Series,
    ball_contains,
    equal_to_precision,
    invert,
    p_adic_order,
    power_content,
    pth_root,
    same_characteristic,
    scale,
    split_exponent,
    sub,
)
from src.config import BRUTE_FORCE_CAP, SAMPLE_RANGE, SEARCH_DEPTH
from src.errors import (
    CharZero,
    ConstantSeries,
    InsufficientPrecision,
    IsPthPower,
    NotAUniformiser,
    OutsideBall,
    SearchSpaceTooLarge,
    ZeroToPrecision,
)
from src.orbits.hensel import hensel_data, solve
from src.orbits.models import MembershipResult, NotInOrbit, OrbitBound, Unknown, Witness

logger = logging.getLogger(__name__)

_HENSEL_FAILURES = (
    OutsideBall,
    InsufficientPrecision,
    IsPthPower,
    ConstantSeries,
    ZeroToPrecision,
    NotAUniformiser,
)


def _require_nonconstant(x: Series) -> None:
    if x.is_empty:
        raise InsufficientPrecision(f"series is zero to precision {x.precision}")
    if all(e == 0 for e, _ in x.terms):
        raise ConstantSeries(f"{x} is constant to precision {x.precision}")


# ── Sampling ────────────────────────────────────────────────────────────────


def sample_substitution(p: int, n: int, precision: int, rng: random.Random) -> Uniformiser:
    """Random s in t + M^n (any uniformiser when n = 1) with the given precision."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    precision = max(precision, 2)

    def draw(nonzero: bool) -> Coefficient:
        if p:
            return rng.randrange(1, p) if nonzero else rng.randrange(p)
        value = 0
        while True:
            value = rng.randint(-SAMPLE_RANGE, SAMPLE_RANGE)
            if value or not nonzero:
                return value

    coefficients = {1: draw(nonzero=True) if n == 1 else 1}
    for j in range(max(n, 2), precision):
        coefficients[j] = draw(nonzero=False)
    return Uniformiser(Series.from_dict(p, coefficients, precision))


def sample_substitutions(p: int, n: int, precision: int, seed: int, count: int) -> List[Uniformiser]:
    rng = random.Random(seed)
    return [sample_substitution(p, n, precision, rng) for _ in range(count)]


def sample_orbit(a: Series, n: int, seed: int, count: int) -> List[Series]:
    """``count`` points a∘s of Orb_n(a), deterministic in ``seed``."""
    subs = sample_substitutions(a.characteristic, n, a.precision, seed, count)
    return [compose(a, s) for s in subs]


# ── Nearly-open containment ─────────────────────────────────────────────────


def nearly_open_bound(b: Series, n: int) -> OrbitBound:
    _require_nonconstant(b)
    p = b.characteristic
    l = power_content(b)
    a = pth_root(b, l)
    va = a.terms[0][0]
    if va >= 0:
        N1 = hensel_data(a, n).N
    else:
        # v(x^-1 - a^-1) = v(x - a) - 2 v(a) whenever v(x) = v(a)
        N1 = hensel_data(invert(a), n).N + 2 * va
    N = p**l * (N1 + 1) - 1 if p else N1
    return OrbitBound(l=l, N1=N1, N=N, n=n)


def _hensel_witness(a: Series, b: Series, n: int) -> Series:
    """y with a∘y = b, through the inverses when v(a) < 0."""
    if a.terms and a.terms[0][0] < 0:
        return solve(invert(a), n, invert(b))
    return solve(a, n, b)


def _verified_witness(a: Series, b: Series, s: Uniformiser, target: int) -> Optional[Witness]:
    try:
        image = compose(a, s)
    except InsufficientPrecision:
        return None
    verified_to = min(image.precision, b.precision)
    if verified_to < target or not equal_to_precision(image, b):
        return None
    return Witness(s=s, verified_to=verified_to)


def nearly_open_witness(b: Series, n: int, b_prime: Series) -> Witness:
    """s in t + M^n with b∘s = b' for b' in B(N; b) ∩ F((t))^(p^l)."""
    bound = nearly_open_bound(b, n)
    if not ball_contains(Ball(b, bound.N), b_prime):
        raise OutsideBall(f"{b_prime} is not in B({bound.N}; {b})")
    a = pth_root(b, bound.l)
    a_prime = pth_root(b_prime, bound.l)
    s = Uniformiser(_hensel_witness(a, a_prime, n))
    witness = _verified_witness(b, b_prime, s, target=bound.N + 1)
    if witness is None:
        raise InsufficientPrecision("solver output could not be verified to the ball radius")
    return witness


# ── Continuity ──────────────────────────────────────────────────────────────


def continuity_bound(c: Series, N: int) -> int:
    """Least n with p^l (n + k - 1) > N for every support exponent i = k p^l != 0."""
    if c.is_empty:
        raise ZeroToPrecision(f"series is zero to precision {c.precision}")
    p = c.characteristic
    n = 1
    for i, _ in c.terms:
        if i == 0:
            continue
        k, l = split_exponent(p, i)
        q = p**l if p else 1
        n = max(n, -(-(N + 1) // q) - k + 1)
    return n


def _continuity_radius(a: Series, n: int) -> int:
    """v(a∘u - a) is at least this for every u in t + M^n."""
    p = a.characteristic
    radius = a.precision
    for i, _ in a.terms:
        if i == 0:
            continue
        k, l = split_exponent(p, i)
        radius = min(radius, (p**l if p else 1) * (n + k - 1))
    return radius


# ── Membership ──────────────────────────────────────────────────────────────


def _first_exponent_of_order(x: Series, l: int) -> Optional[int]:
    p = x.characteristic
    for e, _ in x.terms:
        if e != 0 and p_adic_order(p, e) <= l:
            return e
    return None


def _scalar_constraints(a: Series, b: Series) -> Tuple[Optional[str], List[Tuple[int, Coefficient]]]:
    """Leading-term relations b_e = a_e * s1^m; returns (rejection, [(m, ratio)])."""
    p = a.characteristic
    constraints: List[Tuple[int, Coefficient]] = []
    va = a.terms[0][0]
    lead_ratio = b.terms[0][1] * raw_inverse(p, a.terms[0][1])
    if va == 0:
        if a.terms[0][1] != b.terms[0][1]:
            return "constant term is fixed by every substitution", []
    else:
        constraints.append((va, lead_ratio % p if p else lead_ratio))
    if p:
        l = min(power_content(a), power_content(b))
        e_a, e_b = _first_exponent_of_order(a, l), _first_exponent_of_order(b, l)
        if e_a is not None and e_a == e_b:
            ratio = b.get(e_a) * raw_inverse(p, a.get(e_a)) % p
            constraints.append((e_a // p**l, ratio))
    return None, constraints


def _scalar_feasible(p: int, n: int, constraints: Sequence[Tuple[int, Coefficient]]) -> bool:
    if n >= 2:
        return all(ratio == 1 for _, ratio in constraints)
    if p:
        return any(
            all(pow(s1, m, p) == ratio for m, ratio in constraints) for s1 in range(1, p)
        )
    for m, ratio in constraints:
        target = Fraction(ratio) if m > 0 else 1 / Fraction(ratio)
        if rational_root(target, abs(m)) is None:
            return False
    return True


def _invariant_rejection(a: Series, b: Series, n: int) -> Optional[str]:
    p = a.characteristic
    va, vb = a.terms[0][0], b.terms[0][0]
    if va != vb:
        return f"valuation {va} != {vb}"
    if p:
        l = min(power_content(a), power_content(b))
        e_a, e_b = _first_exponent_of_order(a, l), _first_exponent_of_order(b, l)
        if e_a != e_b:
            lower, other = (e_a, b) if e_b is None or (e_a is not None and e_a < e_b) else (e_b, a)
            if lower is not None and lower < other.precision:
                return f"first exponent of {p}-adic order <= {l} differs ({e_a} vs {e_b})"
    rejection, constraints = _scalar_constraints(a, b)
    if rejection:
        return rejection
    if not _scalar_feasible(p, n, constraints):
        return "leading coefficients are not related by any admissible s1"
    if n >= 2:
        d = sub(b, a)
        radius = _continuity_radius(a, n)
        if d.terms and d.terms[0][0] < radius:
            return f"v(b - a) = {d.terms[0][0]} < {radius}, beyond the reach of t + M^{n}"
    return None


def _candidate_scalars(a: Series, b: Series, n: int) -> List[Coefficient]:
    p = a.characteristic
    if n >= 2:
        return [1]
    if p:
        return list(range(1, p))
    candidates: List[Coefficient] = [Fraction(1)]
    va = a.terms[0][0]
    if va != 0:
        ratio = Fraction(b.terms[0][1]) / Fraction(a.terms[0][1])
        root = rational_root(ratio if va > 0 else 1 / ratio, abs(va))
        if root is not None:
            candidates.extend(c for c in (root, -root) if c not in candidates)
    return candidates


def _hensel_path(a: Series, b: Series, a_r: Series, b_r: Series, n: int, target: int) -> Optional[Witness]:
    p = a.characteristic
    v = a_r.terms[0][0]
    length = a_r.precision + 2 * abs(v) + 2
    for c in _candidate_scalars(a, b, n):
        scaled = a_r if c == 1 else compose(a_r, Uniformiser.scalar(p, c, length))
        try:
            y = _hensel_witness(scaled, b_r, n)
            s = Uniformiser(y if c == 1 else scale(y, c))
        except _HENSEL_FAILURES:
            continue
        witness = _verified_witness(a, b, s, target)
        if witness is not None:
            logger.debug(f"Hensel witness with s1 = {c}")
            return witness
    return None


def _search_length(a_r: Series, target: int) -> int:
    p = a_r.characteristic
    v = a_r.terms[0][0]
    limit = target + 2 * abs(v) + 4
    for K in range(2, limit):
        if compose(a_r, Series.monomial(p, 1, K)).precision >= target:
            return K
    return limit


def _search(a: Series, b: Series, a_r: Series, b_r: Series, n: int, depth: int, target: int) -> MembershipResult:
    p = a.characteristic
    K = _search_length(a_r, min(a_r.precision, b_r.precision))
    coefficients: List[int] = [0] * K
    depth_hit = False

    def options(j: int) -> Sequence[int]:
        if j == 1:
            return range(1, p) if n == 1 else (1,)
        return range(p) if j >= n else (0,)

    def descend(j: int) -> Optional[Witness]:
        nonlocal depth_hit
        for c in options(j):
            coefficients[j] = c
            partial = Series.from_dict(p, dict(enumerate(coefficients[: j + 1])), j + 1)
            image = compose(a_r, partial)
            if not equal_to_precision(image, b_r):
                continue
            if j == K - 1:
                witness = _verified_witness(a, b, Uniformiser(partial), target)
                if witness is not None:
                    return witness
                continue
            if j >= depth:
                depth_hit = True
                continue
            found = descend(j + 1)
            if found is not None:
                return found
        coefficients[j] = 0
        return None

    witness = descend(1)
    if witness is not None:
        return witness
    if depth_hit:
        logger.info(f"membership search stopped at depth {depth} of {K - 1}")
        return Unknown(reason="search depth exhausted")
    return Unknown(reason=f"no substitution modulo t^{K} matches; no invariant separates the pair")


def orbit_member(a: Series, b: Series, n: int, depth: int = SEARCH_DEPTH) -> MembershipResult:
    """Witness, certified NotInOrbit, or Unknown for b in Orb_n(a)."""
    p = same_characteristic(a, b)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    _require_nonconstant(a)
    _require_nonconstant(b)
    rejection = _invariant_rejection(a, b, n)
    if rejection:
        return NotInOrbit(reason=rejection)

    target = min(a.precision, b.precision)
    l = min(power_content(a), power_content(b))
    a_r, b_r = pth_root(a, l), pth_root(b, l)
    witness = _hensel_path(a, b, a_r, b_r, n, target)
    if witness is not None:
        return witness
    if p == 0:
        return Unknown(reason="outside the certified Hensel ball; no search in characteristic 0")
    return _search(a, b, a_r, b_r, n, depth, target)


def brute_force_witness(a: Series, b: Series, K: int, n: int = 1) -> MembershipResult:
    """Exhaustive oracle over s mod t^K, lexicographic in (s1, s2, ...)."""
    p = same_characteristic(a, b)
    if p == 0:
        raise CharZero("enumeration needs a finite residue field")
    if K < 2:
        raise ValueError(f"K must be at least 2, got {K}")
    if p**K > BRUTE_FORCE_CAP:
        raise SearchSpaceTooLarge(f"{p}^{K} candidates exceed the cap {BRUTE_FORCE_CAP}")
    first = range(1, p) if n == 1 else (1,)
    rest = [range(p) if j >= n else (0,) for j in range(2, K)]
    for combo in itertools.product(first, *rest):
        s = Uniformiser(Series.from_dict(p, {j + 1: c for j, c in enumerate(combo)}, K))
        image = compose(a, s)
        if equal_to_precision(image, b):
            return Witness(s=s, verified_to=min(image.precision, b.precision))
    return NotInOrbit(reason=f"no substitution modulo t^{K} matches")
