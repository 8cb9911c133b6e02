import random

import pytest
from typer.testing import CliRunner


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


@pytest.fixture
def runner() -> CliRunner:
    # click < 8.2 mixes stderr into stdout unless asked not to
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()
