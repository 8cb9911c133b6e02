import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.algebra.compose import (
    Uniformiser,
    act,
    compose,
    composition_precision,
    group_compose,
    group_inverse,
)
from src.algebra.series import Series, equal_to_precision, invert, parse, shift, truncate
from src.errors import InsufficientPrecision, NotAUniformiser, NotInMaximalIdeal
from tests.strategies import PRIMES, random_series, random_uniformiser, series, uniformisers


def S(text: str, p: int) -> Series:
    return parse(text, p)


def U(text: str, p: int) -> Uniformiser:
    return Uniformiser(parse(text, p))


def is_identity(s: Uniformiser) -> bool:
    return equal_to_precision(s.body, Series.monomial(s.characteristic, 1, s.precision))


class TestCompose:
    def test_example(self):
        result = compose(S("t + t^2 + O(t^8)", 2), S("t + t^3 + O(t^8)", 2))
        assert str(result) == "t + t^2 + t^3 + t^6 + O(t^8)"

    @pytest.mark.parametrize("p", PRIMES)
    def test_identity_substitution(self, p, rng):
        for _ in range(20):
            f = random_series(rng, p, 0, 10, 10)
            assert compose(f, Uniformiser.identity(p, 12)) == f
            laurent = random_series(rng, p, -3, 10, 10)
            assert equal_to_precision(compose(laurent, Uniformiser.identity(p, 12)), laurent)

    def test_negative_valuation(self):
        s = S("t + t^2 + O(t^8)", 2)
        result = compose(S("t^-1 + O(t^8)", 2), s)
        assert str(result).startswith("t^-1 + 1 + t + t^2")
        assert equal_to_precision(result, invert(s))

    def test_precision_formula(self):
        # i = 6 = 3 * 2 perturbs at 2 * (3 - 1 + P_s)
        f = S("t + t^6 + O(t^40)", 2)
        assert composition_precision(f, 5) == min(40, 5, 2 * (3 - 1 + 5))
        assert composition_precision(S("t^4 + O(t^40)", 2), 5) == 4 * 5
        assert composition_precision(S("t^4 + O(t^40)", 0), 5) == 4 - 1 + 5

    def test_precision_formula_negative_exponents(self):
        # i = -9 = -1 * 3^2 perturbs at 9 * (-1 - 1 + P_s)
        f = S("t^-9 + O(t^200)", 3)
        assert composition_precision(f, 20) == 9 * (-1 - 1 + 20)
        assert composition_precision(S("t^-3 + t^-1 + O(t^50)", 2), 10) == min(50, -3 - 1 + 10, -1 - 1 + 10)
        assert composition_precision(S("t^-1 + O(t^8)", 2), 8, s_valuation=2) == 2 * (-1 - 1) + 8

    def test_laurent_keeps_declared_precision(self):
        result = compose(S("t^-9 + O(t^200)", 3), S("t + t^2 + O(t^20)", 3))
        assert result.precision == 162
        # (t + t^2)^-9 = t^-9 (1 + t^9)^-1 over F_3
        expected = Series.from_dict(3, {9 * j - 9: 1 if j % 2 == 0 else 2 for j in range(19)}, 162)
        assert result == expected

    def test_laurent_with_higher_valuation(self):
        assert str(compose(S("t^-1 + O(t^8)", 2), S("t^2 + O(t^8)", 2))) == "t^-2 + O(t^4)"

    def test_errors(self):
        f = S("t + O(t^4)", 2)
        with pytest.raises(NotInMaximalIdeal):
            compose(f, S("1 + t + O(t^4)", 2))
        with pytest.raises(InsufficientPrecision):
            compose(f, S("O(t^4)", 2))


class TestUniformiser:
    def test_validation(self):
        with pytest.raises(NotAUniformiser):
            U("t^2 + O(t^4)", 2)
        with pytest.raises(NotAUniformiser):
            U("O(t^4)", 2)
        with pytest.raises(NotAUniformiser):
            Uniformiser(Series.from_dict(3, {1: 2}, 1))

    def test_act(self):
        assert str(act(U("t + t^3 + O(t^8)", 2), S("t^2 + O(t^8)", 2))) == "t^2 + t^6 + O(t^8)"
        assert str(act(U("2*t + t^2 + O(t^6)", 3), S("1 + O(t^6)", 3))) == "1 + O(t^6)"
        x = S("t^-2 + t + O(t^5)", 5)
        assert equal_to_precision(act(Uniformiser.identity(5, 9), x), x)

    def test_scalar(self):
        c = Uniformiser.scalar(3, 2, 6)
        assert str(act(c, S("t + t^2 + O(t^6)", 3))) == "2*t + t^2 + O(t^6)"


class TestGroupInverse:
    def test_identity(self):
        assert group_inverse(Uniformiser.identity(5, 10)) == Uniformiser.identity(5, 10)

    def test_reversion_char_2(self):
        u = group_inverse(U("t + t^2 + O(t^33)", 2))
        assert u.body == Series.from_dict(2, {2**k: 1 for k in range(6)}, 33)
        assert is_identity(group_compose(U("t + t^2 + O(t^33)", 2), u))

    def test_reversion_char_3(self):
        u = group_inverse(U("t + t^3 + O(t^29)", 3))
        assert str(u) == "t + 2*t^3 + t^9 + 2*t^27 + O(t^29)"
        assert is_identity(group_compose(U("t + t^3 + O(t^29)", 3), u))

    def test_short_reversion(self):
        assert str(group_inverse(U("t + t^3 + O(t^11)", 3))) == "t + 2*t^3 + t^9 + O(t^11)"
        assert str(group_inverse(U("t + t^2 + O(t^16)", 2))) == "t + t^2 + t^4 + t^8 + O(t^16)"

    def test_rational_mode(self):
        u = group_inverse(U("t + t^2 + O(t^6)", 0))
        # Catalan numbers with alternating sign
        assert str(u) == "t - t^2 + 2*t^3 - 5*t^4 + 14*t^5 + O(t^6)"


class TestLaws:
    @given(data=st.data(), p=st.sampled_from(PRIMES))
    def test_homomorphism(self, data, p):
        x = data.draw(series(p, -2, 12))
        y = data.draw(series(p, -2, 12))
        s = data.draw(uniformisers(p, 12))
        assert equal_to_precision(compose(x + y, s), compose(x, s) + compose(y, s))
        assert equal_to_precision(compose(x * y, s), compose(x, s) * compose(y, s))

    @given(data=st.data(), p=st.sampled_from(PRIMES))
    def test_associativity(self, data, p):
        x = data.draw(series(p, -1, 10))
        s = data.draw(uniformisers(p, 10))
        u = data.draw(uniformisers(p, 10))
        assert equal_to_precision(compose(compose(x, s), u), compose(x, group_compose(s, u)))

    @given(data=st.data(), p=st.sampled_from(PRIMES))
    def test_inverse_both_sides(self, data, p):
        s = data.draw(uniformisers(p, 14))
        u = group_inverse(s)
        assert is_identity(group_compose(s, u))
        assert is_identity(group_compose(u, s))

    @given(data=st.data(), p=st.sampled_from(PRIMES))
    def test_valuation_preserved(self, data, p):
        x = data.draw(series(p, -3, 10, nonzero=True))
        s = data.draw(uniformisers(p, 10))
        image = act(s, x)
        assert not image.is_empty
        assert image.terms[0][0] == x.terms[0][0]

    @pytest.mark.parametrize("p", PRIMES)
    def test_precision_is_sound(self, p, rng):
        for _ in range(100):
            f = random_series(rng, p, 0, 24, 24)
            s = random_uniformiser(rng, p, 8)
            declared = composition_precision(f, s.precision)
            lifts = [
                Series.from_dict(p, {**s.body.coefficients, **{e: rng.randrange(p) for e in range(8, 24)}}, 24)
                for _ in range(2)
            ]
            images = [truncate(compose(f, lift), declared) for lift in lifts]
            assert images[0] == images[1] == compose(f, s)

    @pytest.mark.parametrize("p", PRIMES)
    def test_laurent_precision_is_sound(self, p, rng):
        for _ in range(100):
            f = random_series(rng, p, -6, 24, 24)
            s = random_uniformiser(rng, p, 10)
            declared = composition_precision(f, s.precision)
            result = compose(f, s)
            assert result.precision == declared
            lifts = [
                Series.from_dict(p, {**s.body.coefficients, **{e: rng.randrange(p) for e in range(10, 30)}}, 30)
                for _ in range(2)
            ]
            images = [truncate(compose(f, lift), declared) for lift in lifts]
            assert images[0] == images[1] == result

    @pytest.mark.slow
    @pytest.mark.parametrize("p", PRIMES)
    def test_group_suite_at_precision_32(self, p, rng):
        for _ in range(500):
            x = random_series(rng, p, -2, 32, 32)
            y = random_series(rng, p, 0, 32, 32)
            s = random_uniformiser(rng, p, 32)
            u = random_uniformiser(rng, p, 32)
            assert equal_to_precision(compose(x + y, s), compose(x, s) + compose(y, s))
            assert equal_to_precision(compose(x * y, s), compose(x, s) * compose(y, s))
            assert equal_to_precision(compose(compose(y, s), u), compose(y, group_compose(s, u)))
            assert is_identity(group_compose(s, group_inverse(s)))
            assert compose(y, Uniformiser.identity(p, 32)) == y

    def test_shift_commutes_with_substitution(self, rng):
        # t^k∘s = s^k, so (t^k * x)∘s = s^k * (x∘s)
        for _ in range(30):
            x = random_series(rng, 3, 0, 10, 10)
            s = random_uniformiser(rng, 3, 10)
            lhs = compose(shift(x, 2), s)
            rhs = s.body * s.body * compose(x, s)
            assert equal_to_precision(lhs, rhs)
