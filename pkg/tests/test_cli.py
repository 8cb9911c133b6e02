import json

import pytest

from main import app


def run(runner, *args):
    return runner.invoke(app, list(args))


class TestSeriesCommands:
    def test_compose(self, runner):
        result = run(runner, "compose", "--p", "2", "t + t^2 + O(t^8)", "t + t^3 + O(t^8)")
        assert result.exit_code == 0
        assert result.stdout.strip() == "t + t^2 + t^3 + t^6 + O(t^8)"

    def test_compose_json(self, runner):
        result = run(runner, "compose", "--p", "2", "--format", "json", "t + O(t^4)", "t + t^2 + O(t^4)")
        assert result.exit_code == 0
        assert json.loads(result.stdout) == {"p": 2, "terms": [[1, 1], [2, 1]], "prec": 4}

    def test_solve(self, runner):
        result = run(runner, "solve", "--p", "2", "--n", "2", "t + t^2 + O(t^8)", "t + t^2 + t^4 + O(t^8)")
        assert result.exit_code == 0
        assert result.stdout.strip() == "t + t^4 + O(t^8)"

    def test_reverse_and_invert(self, runner):
        assert run(runner, "reverse", "--p", "3", "t + t^3 + O(t^11)").stdout.strip() == "t + 2*t^3 + t^9 + O(t^11)"
        assert run(runner, "invert", "--p", "2", "t + O(t^4)").stdout.strip() == "t^-1 + O(t^2)"


class TestOrbitCommands:
    def test_bound(self, runner):
        result = run(runner, "orbit", "bound", "--p", "2", "--n", "2", "t^2 + O(t^8)")
        assert result.exit_code == 0
        assert json.loads(result.stdout) == {"l": 1, "N1": 2, "N": 5, "n": 2}

    def test_sample_is_deterministic(self, runner):
        args = ("orbit", "sample", "--p", "3", "--seed", "7", "--count", "4", "t + t^2 + O(t^10)")
        first, second = run(runner, *args), run(runner, *args)
        assert first.exit_code == 0
        assert first.stdout == second.stdout
        assert len(first.stdout.strip().splitlines()) == 4

    def test_sample_bare_polynomial_takes_prec(self, runner):
        result = run(runner, "orbit", "sample", "--seed", "1", "--count", "1", "--prec", "6", "t^2")
        assert result.exit_code == 0
        assert result.stdout.strip().endswith("O(t^6)")

    def test_member(self, runner):
        result = run(runner, "orbit", "member", "--p", "2", "--format", "json", "t^3 + O(t^8)", "t^3 + t^5 + O(t^8)")
        assert result.exit_code == 0
        assert json.loads(result.stdout)["kind"] == "witness"


class TestFormulaCommands:
    def test_emit_template(self, runner):
        result = run(runner, "emit", "G")
        assert result.exit_code == 0
        assert result.stdout.splitlines()[0] == "G(x;t) := ∃y. (E(y;t) ∧ x = y*t)"

    def test_emit_beta_json(self, runner):
        result = run(runner, "emit", "--p", "2", "--n", "2", "--format", "json", "t^2 + O(t^8)")
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["formula"] == "⊤ ∧ ψ(x) ∧ α(x;t)"
        assert payload["definitions"]["α(x;t)"] == "∃u. (G(u;t) ∧ χ(x;u))"

    def test_emit_inline(self, runner):
        result = run(runner, "emit", "--inline", "E")
        assert result.exit_code == 0
        assert "A(" not in result.stdout

    def test_substitute_o(self, runner):
        result = run(runner, "substitute-o", "C'")
        assert result.exit_code == 0
        assert result.stdout.startswith("C″(x) := ")
        assert "O(" not in result.stdout

    def test_eval_beta(self, runner):
        result = run(runner, "eval", "beta", "--p", "2", "--n", "2", "--orbit-of", "t^2 + O(t^8)", "t^2 + t^6 + O(t^8)")
        assert result.exit_code == 0
        assert result.stdout.startswith("true witness u = ")

    def test_eval_template(self, runner):
        result = run(runner, "eval", "A", "--p", "2", "O(t^-2)")
        assert result.stdout.strip() == "unknown (insufficient_precision)"


class TestExitCodes:
    @pytest.mark.parametrize(
        "args, code",
        [
            (("solve", "t + t^2 + O(t^8)", "t + O(t^8)"), "OUTSIDE_BALL"),
            (("compose", "t + O(t^4)", "1 + t + O(t^4)"), "NOT_IN_MAXIMAL_IDEAL"),
            (("invert", "t + t^2"), "MISSING_PRECISION"),
            (("reverse", "t^2 + O(t^4)"), "NOT_A_UNIFORMISER"),
            (("eval", "C''", "t + O(t^4)"), "NOT_EVALUABLE"),
        ],
    )
    def test_domain_errors(self, runner, args, code):
        result = run(runner, *args)
        assert result.exit_code == 1
        assert result.stderr.startswith(f"{code}: ")

    def test_bad_characteristic(self, runner):
        result = run(runner, "compose", "--p", "4", "t + O(t^4)", "t + O(t^4)")
        assert result.exit_code == 2
        assert result.stderr.startswith("USAGE_ERROR")

    def test_missing_argument(self, runner):
        assert run(runner, "compose", "t + O(t^4)").exit_code == 2
