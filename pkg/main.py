"""
Laurent orbits - Command Line Interface

Scriptable access to the series toolkit: substitution, reversion, the
Hensel-like solver, orbit bounds and membership, and the definability
formulas.

Usage Examples:
    # Substitute t -> t + t^3 into t + t^2 over F_2
    python main.py compose --p 2 "t + t^2 + O(t^8)" "t + t^3 + O(t^8)"

    # Solve f(y) = b with y in t + M^2
    python main.py solve --p 2 --n 2 "t + t^2 + O(t^8)" "t + t^2 + t^4 + O(t^8)"

    # Ball radii of the nearly-open containment
    python main.py orbit bound --p 2 --n 2 "t^2 + O(t^8)"

    # Orbit formula for t^2 and its evaluation at a point
    python main.py emit --p 2 --n 2 "t^2 + O(t^8)"
    python main.py eval beta --p 2 --orbit-of "t^2 + O(t^8)" "t^2 + t^6 + O(t^8)"

Exit codes: 0 on success, 1 on a domain error (CODE: message on stderr),
2 on a usage error. Identical flags and seed give byte-identical output.

Environment Variables:
    LAURENT_DEFAULT_PREC, LAURENT_SEARCH_DEPTH, LAURENT_LOG_LEVEL (see src/config.py)
"""

import json
import logging
import sys
from contextlib import contextmanager
from enum import Enum
from typing import Annotated, Iterator, List, Optional

import typer
from pydantic import BaseModel, Field, ValidationError, field_validator
from rich.console import Console

from src.algebra.compose import Uniformiser, compose, group_inverse
from src.algebra.field import check_characteristic
from src.algebra.series import Series, invert, parse, to_json, to_payload, to_text
from src.config import DEFAULT_PREC, LOG_LEVEL, SEARCH_DEPTH
from src.errors import BadModulus, ToolkitError, format_error
from src.formulas.ast import Formula, inline
from src.formulas.evaluator import eval_formula, eval_template
from src.formulas.syntax import print_formula, print_node, signature
from src.formulas.templates import (
    RING_T_TEMPLATES,
    VF_TEMPLATES,
    TemplateParams,
    canonical_name,
    emit_orbit_formula_ring,
    emit_orbit_formula_scalar,
    referenced,
    substitute_O,
    template,
)
from src.orbits.hensel import solve as hensel_solve
from src.orbits.orbit import nearly_open_bound, orbit_member, sample_orbit

console = Console(markup=False, highlight=False, emoji=False, soft_wrap=True)
err_console = Console(stderr=True, markup=False, highlight=False, emoji=False, soft_wrap=True)

logger = logging.getLogger(__name__)

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Exact truncated Laurent series: substitution, orbits and definability formulas.",
)
orbit_app = typer.Typer(no_args_is_help=True, help="Orbit bounds, samples and membership.")
app.add_typer(orbit_app, name="orbit")


class OutputFormat(str, Enum):
    text = "text"
    json = "json"


class CliConfig(BaseModel):
    """Validated command-line settings."""

    p: int = Field(description="Characteristic; 0 selects the rational mode")
    prec: int = Field(default=DEFAULT_PREC, ge=2, description="Working precision")
    seed: Optional[int] = Field(default=None, description="PRNG seed for sampling")
    l: Optional[int] = Field(default=None, description="Robinson prime")
    depth: int = Field(default=SEARCH_DEPTH, ge=1, description="Search depth cap")
    output: OutputFormat = OutputFormat.text

    @field_validator("p")
    @classmethod
    def _characteristic(cls, p: int) -> int:
        try:
            return check_characteristic(p)
        except BadModulus as e:
            raise ValueError(str(e)) from e


# ── Shared options ──────────────────────────────────────────────────────────

POpt = Annotated[int, typer.Option("--p", help="Characteristic: 0 (rational mode) or a prime")]
NOpt = Annotated[int, typer.Option("--n", min=1, help="Congruence level; 1 is the full group")]
FormatOpt = Annotated[OutputFormat, typer.Option("--format", help="Output format")]
VerboseOpt = Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging on stderr")]
DepthOpt = Annotated[int, typer.Option("--depth", help="Search depth cap")]
LOpt = Annotated[Optional[int], typer.Option("--l", help="Robinson prime (default: least prime != p)")]


def _configure(verbose: bool, **values) -> CliConfig:
    logging.basicConfig(
        level=logging.DEBUG if verbose else LOG_LEVEL,
        format="%(asctime)s | %(name)s | %(levelname)s | %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stderr,
        force=True,
    )
    try:
        return CliConfig(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        error = e.errors()[0]
        err_console.print(f"USAGE_ERROR: {error['loc'][0]}: {error['msg']}")
        raise typer.Exit(2) from e


@contextmanager
def _domain_errors() -> Iterator[None]:
    """ToolkitError -> exit 1 with the machine-readable code on stderr."""
    try:
        yield
    except ToolkitError as e:
        logger.debug("domain error", exc_info=True)
        err_console.print(format_error(e))
        raise typer.Exit(1) from e


def _emit_series(x: Series, config: CliConfig) -> None:
    console.print(to_json(x) if config.output is OutputFormat.json else to_text(x))


def _emit_json(payload) -> None:
    console.print(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))


# ── Series commands ─────────────────────────────────────────────────────────


@app.command("compose")
def compose_command(
    f: Annotated[str, typer.Argument(help="Series f")],
    s: Annotated[str, typer.Argument(help="Series s with v(s) >= 1")],
    p: POpt = 2,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Print f∘s."""
    config = _configure(verbose, p=p, output=output)
    with _domain_errors():
        _emit_series(compose(parse(f, config.p), parse(s, config.p)), config)


@app.command("invert")
def invert_command(
    x: Annotated[str, typer.Argument(help="Series x")],
    p: POpt = 2,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Print the multiplicative inverse 1/x."""
    config = _configure(verbose, p=p, output=output)
    with _domain_errors():
        _emit_series(invert(parse(x, config.p)), config)


@app.command("reverse")
def reverse_command(
    s: Annotated[str, typer.Argument(help="Uniformiser s")],
    p: POpt = 2,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Print the compositional inverse of a uniformiser."""
    config = _configure(verbose, p=p, output=output)
    with _domain_errors():
        _emit_series(group_inverse(Uniformiser(parse(s, config.p))).body, config)


@app.command("solve")
def solve_command(
    f: Annotated[str, typer.Argument(help="Series f in F[[t]], not a p-th power")],
    b: Annotated[str, typer.Argument(help="Target b in B(N; f)")],
    p: POpt = 2,
    n: NOpt = 2,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Print y in t + M^n with f∘y = b."""
    config = _configure(verbose, p=p, output=output)
    with _domain_errors():
        _emit_series(hensel_solve(parse(f, config.p), n, parse(b, config.p)), config)


# ── Orbit commands ──────────────────────────────────────────────────────────


@orbit_app.command("bound")
def orbit_bound_command(
    b: Annotated[str, typer.Argument(help="Series b")],
    p: POpt = 2,
    n: NOpt = 2,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Print (l, N1, N, n) with B(N; b) ∩ F((t))^(p^l) ⊆ Orb_n(b)."""
    config = _configure(verbose, p=p, output=output)
    with _domain_errors():
        console.print(nearly_open_bound(parse(b, config.p), n).model_dump_json())


@orbit_app.command("sample")
def orbit_sample_command(
    a: Annotated[str, typer.Argument(help="Series a")],
    seed: Annotated[int, typer.Option("--seed", help="PRNG seed (required)")],
    p: POpt = 2,
    n: NOpt = 1,
    count: Annotated[int, typer.Option("--count", min=0, help="Number of samples")] = 5,
    prec: Annotated[Optional[int], typer.Option("--prec", help="Precision of a when it is a bare polynomial")] = None,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Print pseudo-random points a∘s of Orb_n(a)."""
    config = _configure(verbose, p=p, seed=seed, prec=prec, output=output)
    with _domain_errors():
        text = a if "O(" in a else f"{a} + O(t^{config.prec})"
        samples = sample_orbit(parse(text, config.p), n, seed, count)
        if config.output is OutputFormat.json:
            _emit_json([to_payload(x).model_dump() for x in samples])
        else:
            for x in samples:
                console.print(to_text(x))


@orbit_app.command("member")
def orbit_member_command(
    a: Annotated[str, typer.Argument(help="Series a")],
    b: Annotated[str, typer.Argument(help="Series b")],
    p: POpt = 2,
    n: NOpt = 1,
    depth: DepthOpt = SEARCH_DEPTH,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Decide b ∈ Orb_n(a): witness, not_in_orbit or unknown."""
    config = _configure(verbose, p=p, depth=depth, output=output)
    with _domain_errors():
        result = orbit_member(parse(a, config.p), parse(b, config.p), n, config.depth)
        if config.output is OutputFormat.json:
            _emit_json(result.to_dict())
        elif result.kind == "witness":
            console.print(f"witness: s = {result.s} (verified to t^{result.verified_to})")
        else:
            console.print(f"{result.kind}: {result.reason}")


# ── Formula commands ────────────────────────────────────────────────────────


def _print_formula(formula: Formula, config: CliConfig) -> None:
    if config.output is OutputFormat.json:
        definitions = {
            signature(d): print_node(d.body) for d in referenced(formula).values()
        }
        _emit_json(
            {
                "name": formula.name,
                "signature": signature(formula),
                "language": formula.language,
                "formula": print_node(formula.body),
                "definitions": definitions,
            }
        )
    else:
        console.print(print_formula(formula, with_definitions=True))


def _is_template(name: str) -> bool:
    name = canonical_name(name)
    doubled = tuple(n.replace("′", "″") for n in VF_TEMPLATES)
    return name in RING_T_TEMPLATES + VF_TEMPLATES + doubled + ("A″", "ψ", "χ")


@app.command("emit")
def emit_command(
    target: Annotated[str, typer.Argument(help="Template name (A, C', A'', psi, ...) or a series a")],
    p: POpt = 2,
    n: NOpt = 1,
    l: LOpt = None,
    m: Annotated[Optional[int], typer.Option("--m", help="Exponent of Ax's formula")] = None,
    content: Annotated[int, typer.Option("--content", min=0, help="ψ exponent is p^content")] = 0,
    ring: Annotated[bool, typer.Option("--ring", help="Emit γ (no parameter t) instead of β")] = False,
    expand: Annotated[bool, typer.Option("--inline", help="Expand every application into its definition")] = False,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Print a template, or the orbit formula β (γ with --ring) of a series."""
    config = _configure(verbose, p=p, l=l, output=output)
    with _domain_errors():
        if _is_template(target):
            params = TemplateParams.build(p=config.p, l=config.l, m=m, content=content)
            formula = template(target, params)
        elif ring:
            formula = emit_orbit_formula_ring(parse(target, config.p), n, config.l, m)
        else:
            formula = emit_orbit_formula_scalar(parse(target, config.p), n, config.l)
        if expand:
            formula = inline(formula)
        _print_formula(formula, config)


@app.command("substitute-o")
def substitute_o_command(
    name: Annotated[str, typer.Argument(help="Valued-field template: C', D', E', F' or H'")],
    p: POpt = 2,
    l: LOpt = None,
    m: Annotated[Optional[int], typer.Option("--m", help="Exponent of Ax's formula")] = None,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Replace every O(term) atom by Ax's formula."""
    config = _configure(verbose, p=p, l=l, output=output)
    with _domain_errors():
        params = TemplateParams.build(p=config.p, l=config.l, m=m)
        _print_formula(substitute_O(template(name, params), params.m), config)


@app.command("eval")
def eval_command(
    name: Annotated[str, typer.Argument(help="Template name, or beta with --orbit-of")],
    x: Annotated[str, typer.Argument(help="Series x")],
    p: POpt = 2,
    l: LOpt = None,
    n: NOpt = 1,
    content: Annotated[int, typer.Option("--content", min=0, help="ψ exponent is p^content")] = 0,
    radius: Annotated[Optional[int], typer.Option("--radius", help="χ radius index N")] = None,
    center: Annotated[Optional[str], typer.Option("--center", help="χ centre f")] = None,
    orbit_of: Annotated[Optional[str], typer.Option("--orbit-of", help="Series a whose β is evaluated")] = None,
    depth: DepthOpt = SEARCH_DEPTH,
    output: FormatOpt = OutputFormat.text,
    verbose: VerboseOpt = False,
) -> None:
    """Evaluate a template, or the orbit formula β of --orbit-of, at x."""
    config = _configure(verbose, p=p, l=l, depth=depth, output=output)
    with _domain_errors():
        value = parse(x, config.p)
        if orbit_of is not None:
            beta = emit_orbit_formula_scalar(parse(orbit_of, config.p), n, config.l)
            result = eval_formula(beta, value, config.depth)
        else:
            params = TemplateParams.build(
                p=config.p,
                l=config.l,
                content=content,
                radius=radius,
                center=parse(center, config.p) if center is not None else None,
            )
            result = eval_template(name, params, value)
        if config.output is OutputFormat.json:
            _emit_json(result.to_dict())
        else:
            parts: List[str] = [result.verdict]
            if result.reason:
                parts.append(f"({result.reason})")
            if result.witness:
                parts.append(f"witness u = {result.witness}")
            console.print(" ".join(parts))


if __name__ == "__main__":
    app()
