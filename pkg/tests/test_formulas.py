import itertools

import pytest

from src.algebra.compose import act
from src.algebra.series import (
    Series,
    add,
    equal_to_precision,
    in_M,
    in_O,
    is_unit,
    is_uniformiser,
    parse,
    power,
    shift,
)
from src.errors import BadParams, CharZero, DepthCap, FormulaSyntaxError, IllFormedFormula, NotEvaluable
from src.formulas.ast import Add, Apply, Formula, Mul, Num, Param, Pow, Sub, Var, free_variables, inline, uses_param, walk
from src.formulas.evaluator import eval_exists_u, eval_formula, eval_template
from src.formulas.syntax import parse_node, parse_term, print_formula, print_node, print_term
from src.formulas.templates import (
    RING_T_TEMPLATES,
    VF_TEMPLATES,
    TemplateParams,
    emit_orbit_formula_ring,
    emit_orbit_formula_scalar,
    referenced,
    substitute_O,
    template,
)
from tests.strategies import random_series, random_uniformiser


def S(text: str, p: int) -> Series:
    return parse(text, p)


CHI_T2 = (
    "χ(x;t) := ∃y1. ∃y2. ∃y3. ∃y4. ∃y5. ∃y6. "
    "(x - t^2 = y1*y2*y3*y4*y5*y6 ∧ C(y1;t) ∧ C(y2;t) ∧ C(y3;t) ∧ C(y4;t) ∧ C(y5;t) ∧ C(y6;t))"
)


class TestPrinting:
    @pytest.mark.parametrize(
        "name, expected",
        [
            ("A", "∃y. 1 + x^3*t = y^3"),
            ("B", "¬∃z. (x*z*t = 1 ∧ A(z;t))"),
            ("C", "∃y. (x = 0 ∨ (x*y = 1 ∧ ¬B(y;t)))"),
            ("G", "∃y. (E(y;t) ∧ x = y*t)"),
            ("H", "∀y. ∀z. (D(x;t) ∧ ¬(x = y*z ∧ C(y;t) ∧ C(z;t)))"),
            ("D'", "¬∃y. (x*y = 1 ∧ O(y))"),
        ],
    )
    def test_bodies(self, name, expected):
        assert print_node(template(name).body) == expected

    def test_definition_heads(self):
        assert print_formula(template("A")) == "A(x;t) := ∃y. 1 + x^3*t = y^3"
        assert print_formula(template("C′")).startswith("C′(x) := ")
        psi = template("psi", TemplateParams.build(p=2, content=1))
        assert print_formula(psi) == "ψ(y) := ∃w. w^2 = y"

    def test_with_definitions_lists_each_once(self):
        lines = print_formula(template("H"), with_definitions=True).splitlines()
        heads = [line.split(" := ")[0] for line in lines]
        assert heads[0] == "H(x;t)"
        assert sorted(heads) == sorted(["H(x;t)", "D(x;t)", "C(x;t)", "B(x;t)", "A(x;t)"])

    def test_robinson_prime_follows_characteristic(self):
        assert print_node(template("A", TemplateParams.build(p=3)).body) == "∃y. 1 + x^2*t = y^2"
        assert print_node(template("A", TemplateParams.build(p=2, l=5)).body) == "∃y. 1 + x^5*t = y^5"


def every_formula():
    params = TemplateParams.build(p=2, content=1, radius=3, center=S("t + t^2 + O(t^8)", 2))
    formulas = [template(name, params) for name in RING_T_TEMPLATES + VF_TEMPLATES]
    formulas += [template(name, params) for name in ("A''", "C''", "D''", "E''", "F''", "H''", "psi", "chi")]
    formulas.append(emit_orbit_formula_scalar(S("t^2 + t^6 + O(t^12)", 2), 2))
    formulas.append(emit_orbit_formula_ring(S("t + t^2 + O(t^8)", 2), 1))
    formulas.append(emit_orbit_formula_scalar(S("t^-1 + 2*t + O(t^8)", 3), 1))
    for formula in list(formulas):
        formulas.extend(referenced(formula).values())
    return formulas


class TestParsing:
    @pytest.mark.parametrize("formula", every_formula(), ids=lambda f: f.name)
    def test_print_parse_round_trip(self, formula):
        assert parse_node(print_node(formula.body)) == formula.body

    def test_terms(self):
        assert parse_term("x - (t + t^2)") == Sub(Var("x"), Add((Param(), Pow(Param(), 2))))
        assert parse_term("2*y^-1") == Mul((Num(2), Pow(Var("y"), -1)))
        assert print_term(parse_term("x*(y + 1)^3")) == "x*(y + 1)^3"

    def test_ascii_primes(self):
        assert parse_node("C'(x)") == Apply("C′", (Var("x"),))
        assert parse_node("A''(y)") == Apply("A″", (Var("y"),))

    @pytest.mark.parametrize(
        "text",
        [
            "x = 0 ∧ x = 1 ∨ x = 2",
            "∃. x = 1",
            "∃t. x = t",
            "x = ",
            "x ≠ 1",
            "O(x, y)",
            "x^y = 1",
            "(x = 1",
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(FormulaSyntaxError):
            parse_node(text)


class TestParams:
    @pytest.mark.parametrize("values", [{"p": 2, "l": 2}, {"p": 2, "l": 4}, {"p": 4}, {"p": 3, "m": 6}])
    def test_bad_values(self, values):
        with pytest.raises(BadParams):
            TemplateParams.build(**values)

    def test_defaults(self):
        assert TemplateParams.build().l == 3
        assert TemplateParams.build(p=3).l == 2
        assert TemplateParams.build(p=0).l == 2
        assert TemplateParams.build(p=5, l=7).m == 7

    def test_unknown_template(self):
        with pytest.raises(BadParams):
            template("Z")
        with pytest.raises(BadParams):
            template("chi")


class TestTemplateEvaluation:
    def test_examples(self):
        params = TemplateParams.build(p=2)
        assert eval_template("A", params, S("1 + O(t^4)", 2)).verdict == "true"
        assert eval_template("A", params, S("t^-1 + O(t^5)", 2)).verdict == "false"
        assert eval_template("G", TemplateParams.build(p=3), S("2*t + t^2 + O(t^5)", 3)).verdict == "true"

    def test_robinson_matches_cube_root_search(self):
        # over F_2 every 1 + x^3*t with v(x) >= 0 has a cube root 1 + O(t) mod t^8
        params = TemplateParams.build(p=2)
        roots = [
            Series.from_dict(2, {0: 1, **{i: c for i, c in enumerate(bits, start=1)}}, 8)
            for bits in itertools.product((0, 1), repeat=7)
        ]
        for bits in itertools.product((0, 1), repeat=4):
            x = Series.from_dict(2, dict(enumerate(bits)), 8)
            if x.is_empty:
                continue
            z = add(Series.monomial(2, 0, 8), shift(power(x, 3), 1))
            found = any(equal_to_precision(power(y, 3), z) for y in roots)
            assert found
            assert eval_template("A", params, x).verdict == "true"

    def test_insufficient_precision(self):
        result = eval_template("A", TemplateParams.build(p=2), S("O(t^-2)", 2))
        assert (result.verdict, result.reason) == ("unknown", "insufficient_precision")

    def test_psi(self):
        params = TemplateParams.build(p=3, content=1)
        assert eval_template("psi", params, S("t^3 + 2*t^9 + O(t^12)", 3)).verdict == "true"
        assert eval_template("psi", params, S("t^3 + t^4 + O(t^12)", 3)).verdict == "false"

    def test_chi(self):
        params = TemplateParams.build(p=2, radius=3, center=S("t + t^2 + O(t^8)", 2))
        assert eval_template("chi", params, S("t + t^2 + t^4 + O(t^8)", 2)).verdict == "true"
        assert eval_template("chi", params, S("t + t^2 + t^3 + O(t^8)", 2)).verdict == "false"
        with pytest.raises(NotEvaluable):
            eval_template("chi", TemplateParams.build(p=2), S("t + O(t^8)", 2))

    def test_whole_formula_dispatch(self):
        x = S("t + O(t^6)", 2)
        assert eval_formula(template("B"), x).verdict == "true"
        assert eval_formula(template("E"), x).verdict == "false"


def agreement(p: int, x: Series) -> None:
    params = TemplateParams.build(p=p)
    expected = {
        ("A", "B"): in_O(x),
        ("C", "D", "C′", "D′"): in_M(x),
        ("E", "F", "E′", "F′"): is_unit(x),
        ("G", "H", "H′"): is_uniformiser(x),
    }
    for names, truth in expected.items():
        for name in names:
            assert eval_template(name, params, x).verdict == ("true" if truth else "false"), (name, x)


class TestDefinableSets:
    def test_exhaustive_char_2(self):
        for bits in itertools.product((0, 1), repeat=9):
            x = Series.from_dict(2, {e: c for e, c in zip(range(-3, 6), bits)}, 6)
            agreement(2, x)

    @pytest.mark.parametrize("p", (3, 5))
    def test_random(self, p, rng):
        for _ in range(300):
            lo = rng.randint(-4, 4)
            x = random_series(rng, p, lo, 8, 8)
            agreement(p, x)


class TestOrbitFormula:
    A = "t^2 + O(t^8)"

    def test_shape(self):
        beta = emit_orbit_formula_scalar(S(self.A, 2), 2)
        assert print_formula(beta) == "β(x;t) := ⊤ ∧ ψ(x) ∧ α(x;t)"
        assert (beta.params["content"], beta.params["radius"]) == (1, 5)
        assert str(beta.params["center"]) == "t^2 + O(t^6)"
        defs = referenced(beta)
        assert print_formula(defs["α"]) == "α(x;t) := ∃u. (G(u;t) ∧ χ(x;u))"
        assert print_formula(defs["χ"]) == CHI_T2
        assert print_formula(defs["ψ"]) == "ψ(y) := ∃w. w^2 = y"

    def test_content_zero_centre(self):
        beta = emit_orbit_formula_scalar(S("t + O(t^8)", 2), 2)
        assert (beta.params["content"], beta.params["radius"]) == (0, 2)
        assert str(beta.params["center"]) == "t + O(t^3)"
        assert print_formula(referenced(beta)["ψ"]) == "ψ(y) := ∃w. w = y"
        assert eval_formula(beta, S("t + t^5 + O(t^8)", 2)).verdict == "true"

    def test_ring_form(self):
        gamma = emit_orbit_formula_ring(S(self.A, 2), 2)
        assert print_formula(gamma) == "γ(x) := ∃v. (H″(v) ∧ β(x;v))"
        assert gamma.language == "ring"
        assert {"H″", "β", "C″", "D″"} <= set(referenced(gamma))

    @pytest.mark.parametrize("x", ["t^2 + t^6 + O(t^8)", "t^2 + O(t^8)", "t^2 + t^4 + t^6 + O(t^8)"])
    def test_members(self, x):
        result = eval_formula(emit_orbit_formula_scalar(S(self.A, 2), 2), S(x, 2))
        assert result.verdict == "true"
        assert result.witness is not None

    @pytest.mark.parametrize("x", ["t^3 + O(t^8)", "t^2 + t^3 + O(t^8)", "t^4 + O(t^8)"])
    def test_non_members(self, x):
        assert eval_formula(emit_orbit_formula_scalar(S(self.A, 2), 2), S(x, 2)).verdict == "false"

    @pytest.mark.parametrize("a", ["t^2 + O(t^8)", "t + t^2 + O(t^8)", "t^2 + t^6 + O(t^8)"])
    def test_classifies_samples(self, a, rng):
        a = S(a, 2)
        beta = emit_orbit_formula_scalar(a, 1)
        for _ in range(50):
            member = act(random_uniformiser(rng, 2, 8), a)
            assert eval_formula(beta, member, depth=8).verdict == "true"
            assert eval_formula(beta, shift(member, 2), depth=8).verdict == "false"
            assert eval_formula(beta, add(member, Series.monomial(2, 1, 8)), depth=8).verdict == "false"

    def test_rational_mode_cannot_enumerate(self):
        beta = emit_orbit_formula_scalar(S("t^2 + O(t^8)", 0), 1)
        with pytest.raises(CharZero):
            eval_formula(beta, S("t^2 + O(t^8)", 0))

    def test_depth(self):
        a = S("t + t^2 + O(t^30)", 2)
        beta = emit_orbit_formula_scalar(a, 17)
        result = eval_formula(beta, a)
        assert (result.verdict, result.reason) == ("unknown", "search_depth_exhausted")
        with pytest.raises(DepthCap):
            eval_formula(beta, a, depth=20)


class TestSubstituteO:
    def test_removes_valuation_atoms(self):
        formula = substitute_O(template("C′"), 3)
        assert (formula.name, formula.language) == ("C″", "ring")
        printed = print_node(formula.body)
        assert "O(" not in printed
        assert free_variables(formula.body) == ("x",)
        assert formula == template("C''")

    def test_renames_definitions(self):
        formula = substitute_O(template("H′"), 3)
        assert set(formula.definitions) == {"D″", "C″"}
        assert {n.name for n in walk(formula.body) if isinstance(n, Apply)} == {"D″", "C″"}

    def test_other_languages_unchanged(self):
        formula = template("A")
        assert substitute_O(formula, 3) is formula

    def test_ax_formulas_are_not_evaluated(self):
        x = S("t + O(t^8)", 2)
        for formula in (template("C''"), template("A''"), emit_orbit_formula_ring(S("t^2 + O(t^8)", 2), 2)):
            with pytest.raises(NotEvaluable):
                eval_formula(formula, x)
        with pytest.raises(NotEvaluable):
            eval_exists_u(template("B"), x)


class TestInline:
    def test_expands_every_application(self):
        formula = inline(template("G"))
        assert formula.definitions == {}
        assert not any(isinstance(n, Apply) for n in walk(formula.body))
        assert free_variables(formula.body) == ("x",)
        assert parse_node(print_node(formula.body)) == formula.body

    def test_keeps_arguments_free(self):
        formula = inline(template("E"))
        printed = print_node(formula.body)
        assert "1 + x^3*t" in printed
        assert "1 + y^3*t" in printed


class TestWellFormedness:
    def test_free_variables_must_be_declared(self):
        with pytest.raises(IllFormedFormula):
            Formula(name="K", body=parse_node("x = y*t"), free=("x",), language="ring_t")
        assert Formula(name="K", body=parse_node("∃y. x = y*t"), free=("x",), language="ring_t")

    def test_constant_only_in_ring_t(self):
        for language in ("ring", "vf"):
            with pytest.raises(IllFormedFormula):
                Formula(name="K", body=parse_node("x = t"), free=("x",), language=language)
        assert Formula(name="K", body=parse_node("x = 1"), free=("x",), language="ring")

    def test_builders_are_well_formed(self):
        params = TemplateParams.build(p=2)
        for name in RING_T_TEMPLATES:
            assert template(name, params).language == "ring_t"
        for name in VF_TEMPLATES:
            assert not uses_param(template(name, params).body)
            assert not uses_param(substitute_O(template(name, params), params.m).body)
        gamma = emit_orbit_formula_ring(S("t^2 + O(t^8)", 2), 2)
        assert gamma.language == "ring"
        assert not uses_param(inline(gamma).body)
        assert free_variables(inline(gamma).body) == ("x",)
