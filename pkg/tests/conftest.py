import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from d2count.poly import Degree2Polynomial

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


def random_multilinear(rng: random.Random, n: int, lo: int = -8, hi: int = 8, constant: bool = True):
    quad = {(i, j): rng.randint(lo, hi) for i in range(n) for j in range(i + 1, n)}
    lin = {i: rng.randint(lo, hi) for i in range(n)}
    c = rng.randint(lo, hi) if constant else 0
    return Degree2Polynomial(n, quad, lin, c, multilinear=True)


def random_full(rng: random.Random, n: int, lo: int = -8, hi: int = 8):
    quad = {(i, j): rng.randint(lo, hi) for i in range(n) for j in range(i, n)}
    lin = {i: rng.randint(lo, hi) for i in range(n)}
    return Degree2Polynomial(n, quad, lin, rng.randint(lo, hi))


coef = st.fractions(min_value=-8, max_value=8, max_denominator=6)


@st.composite
def multilinear_polys(draw, max_n: int = 6, min_n: int = 1):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    quad = {e: draw(coef) for e in pairs if draw(st.booleans())}
    lin = {i: draw(coef) for i in range(n) if draw(st.booleans())}
    return Degree2Polynomial(n, quad, lin, draw(coef), multilinear=True)


@st.composite
def full_polys(draw, max_n: int = 5, min_n: int = 1):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    quad = {e: draw(coef) for e in pairs if draw(st.booleans())}
    lin = {i: draw(coef) for i in range(n) if draw(st.booleans())}
    return Degree2Polynomial(n, quad, lin, draw(coef))


@pytest.fixture
def rng():
    return random.Random(20240611)


def F(a, b=1):
    return Fraction(a, b)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
