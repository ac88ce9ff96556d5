import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from chernforms.forms import jet_from_dict
from chernforms.jetring import ChartSpec, GaussianRational

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

FROZEN = Path(__file__).parent / "oracle" / "frozen.json"


def jet(chart, d, order=4):
    return jet_from_dict(chart, d, order)


def pair_dict(d):
    """{monomial: [re, im]} -> {monomial: GaussianRational}."""
    return {m: GaussianRational(Fraction(re), Fraction(im)) for m, (re, im) in d.items()}


def basis_ids(key: str, n: int):
    """Oracle basis ids (dz_i -> i-1, dzb_i -> n+i-1) to 1-based (I, J)."""
    ids = [int(x) for x in key.split(",")] if key else []
    return tuple(i + 1 for i in ids if i < n), tuple(i - n + 1 for i in ids if i >= n)


@pytest.fixture(scope="session")
def frozen():
    return json.loads(FROZEN.read_text())


@pytest.fixture
def C1():
    return ChartSpec("complex", 1)


@pytest.fixture
def C2():
    return ChartSpec("complex", 2)


@pytest.fixture
def C3():
    return ChartSpec("complex", 3)


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
