import pytest

from src import errors
from src.errors import ToolkitError, error_code, format_error


@pytest.mark.parametrize(
    "cls, code",
    [
        (errors.NotAUniformiser, "NOT_A_UNIFORMISER"),
        (errors.NotAPthPower, "NOT_A_PTH_POWER"),
        (errors.ZeroToPrecision, "ZERO_TO_PRECISION"),
        (errors.CharZero, "CHAR_ZERO"),
        (errors.BadParams, "BAD_PARAMS"),
        (errors.DepthCap, "DEPTH_CAP"),
    ],
)
def test_codes(cls, code):
    assert cls.code == code
    assert error_code(cls("boom")) == code


def test_every_error_is_a_toolkit_error():
    for value in vars(errors).values():
        if isinstance(value, type) and issubclass(value, Exception):
            assert issubclass(value, ToolkitError)
            assert value.code.isupper()


def test_format():
    assert format_error(errors.OutsideBall("b is far")) == "OUTSIDE_BALL: b is far"
    assert format_error(errors.DepthCap()) == "DEPTH_CAP"
    assert format_error(ValueError("x")) == "INTERNAL_ERROR: x"
