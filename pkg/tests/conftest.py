import numpy as np
import pytest
from hypothesis import settings, strategies as st

from bernoulli_lpp.env import Environment, IndependentBernoulli, Word, alignment_env

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIG1_ROWS = ["110101", "001010", "110101", "110101", "001010", "110101"]


@pytest.fixture
def fig1():
    return alignment_env(Word.from_string("AABABA"), Word.from_string("ABAABA"))


def ones(m, n):
    return Environment(np.ones((m, n), np.uint8), IndependentBernoulli(0.5))


def zeros(m, n):
    return Environment(np.zeros((m, n), np.uint8), IndependentBernoulli(0.5))


@st.composite
def environments(draw, max_m=6, max_n=6, min_dim=1):
    m = draw(st.integers(min_dim, max_m))
    n = draw(st.integers(min_dim, max_n))
    bits = draw(st.lists(st.integers(0, 1), min_size=m * n, max_size=m * n))
    return Environment(np.array(bits, np.uint8).reshape(m, n), IndependentBernoulli(0.5))


rationals = st.fractions(min_value=0, max_value=4, max_denominator=12)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
