"""Error hierarchy and helpers for reporting errors by machine-readable code."""

from __future__ import annotations

import re

_CODE_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def _screaming_snake(name: str) -> str:
    return _CODE_BOUNDARY.sub("_", name).upper()


class ToolkitError(Exception):
    """Base class. Subclasses get ``code`` derived from their class name."""

    code: str = "TOOLKIT_ERROR"

    def __init_subclass__(cls, **kwargs) -> None:
        super().__init_subclass__(**kwargs)
        if "code" not in cls.__dict__:
            cls.code = _screaming_snake(cls.__name__)


# ── field ───────────────────────────────────────────────────────────────────


class FieldError(ToolkitError):
    pass


class ZeroInverse(FieldError):
    pass


class BadModulus(FieldError):
    pass


class ZeroInput(FieldError):
    pass


class NotAPower(FieldError):
    pass


# ── series ──────────────────────────────────────────────────────────────────


class SeriesError(ToolkitError):
    pass


class SeriesSyntaxError(SeriesError):
    pass


class CoefficientOutOfRange(SeriesError):
    pass


class MissingPrecision(SeriesError):
    pass


class CharacteristicMismatch(SeriesError):
    pass


class ZeroToPrecision(SeriesError):
    pass


class PrecisionExceeded(SeriesError):
    pass


class NotAPthPower(SeriesError):
    pass


class CharZero(SeriesError):
    pass


class InsufficientPrecision(SeriesError):
    pass


class ConstantSeries(SeriesError):
    pass


# ── compose ─────────────────────────────────────────────────────────────────


class ComposeError(ToolkitError):
    pass


class NotInMaximalIdeal(ComposeError):
    pass


class NotAUniformiser(ComposeError):
    pass


# ── hensel / orbit ──────────────────────────────────────────────────────────


class HenselError(ToolkitError):
    pass


class IsPthPower(HenselError):
    pass


class OutsideBall(HenselError):
    pass


class NotInValuationRing(HenselError):
    pass


class OrbitError(ToolkitError):
    pass


class SearchSpaceTooLarge(OrbitError):
    pass


# ── formulas ────────────────────────────────────────────────────────────────


class FormulaError(ToolkitError):
    pass


class BadParams(FormulaError):
    pass


class FormulaSyntaxError(FormulaError):
    pass


class IllFormedFormula(FormulaError):
    pass


class NotEvaluable(FormulaError):
    pass


class DepthCap(FormulaError):
    pass


# ── Helpers ─────────────────────────────────────────────────────────────────


def error_code(exc: BaseException) -> str:
    """SCREAMING_SNAKE code for toolkit errors, INTERNAL_ERROR otherwise."""
    if isinstance(exc, ToolkitError):
        return exc.code
    return "INTERNAL_ERROR"


def format_error(exc: BaseException) -> str:
    """Return ``CODE: message`` for console output."""
    message = str(exc).strip()
    code = error_code(exc)
    return f"{code}: {message}" if message else code
