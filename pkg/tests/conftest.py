import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from mdlpoly.model import BlockPoint, Scenario
from mdlpoly.numerics import FieldScalar

# acceptance lines collected by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


small_fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def field_scalars(draw, nonzero=False):
    x = FieldScalar([draw(small_fractions) for _ in range(4)])
    if nonzero and x.is_zero():
        x = FieldScalar(1)
    return x


def random_point(rng: random.Random, scenario: Scenario = Scenario(), density: float = 1.0) -> BlockPoint:
    """A random valid point with rational entries, roughly ``density`` of them nonzero."""
    raw = [rng.randint(1, 9) if rng.random() < density else 0 for _ in range(scenario.size)]
    if not any(raw):
        raw[rng.randrange(scenario.size)] = 1
    total = sum(raw)
    return BlockPoint(scenario, tuple(FieldScalar(Fraction(v, total)) for v in raw))


@pytest.fixture
def rng():
    return random.Random(20240917)
