import random

import pytest
from hypothesis import strategies as st

from collperf.params import ParamTable

# Filled by test_acceptance; printed at the end of the run.
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def t0_table() -> ParamTable:
    """L = 10, g(m) = m, os(m) = or(m) = m / 2, in abstract time units."""
    return ParamTable.from_rows(10.0, [(1, 1.0, 0.5, 0.5), (10**6, 1e6, 5e5, 5e5)])


@pytest.fixture
def t0():
    return t0_table()


def random_table(rng: random.Random, n_rows: int | None = None, max_size: int = 1 << 17) -> ParamTable:
    """Valid table with a noisy affine gap; rows may dip, as measured ones do."""
    n_rows = n_rows or rng.randint(2, 8)
    sizes = [1] + sorted(rng.sample(range(2, max_size), n_rows - 1))
    L = 10 ** rng.uniform(-6, -3)
    a = 10 ** rng.uniform(-6, -4)
    b = 10 ** rng.uniform(-9, -7)
    rows = []
    for m in sizes:
        g = (a + b * m) * rng.uniform(0.7, 1.3)
        rows.append((m, g, g * rng.uniform(0.05, 1.0), g * rng.uniform(0.05, 1.0)))
    return ParamTable.from_rows(L, rows)


@st.composite
def tables(draw, max_rows: int = 5):
    n = draw(st.integers(2, max_rows))
    sizes = sorted(draw(st.sets(st.integers(2, 1 << 20), min_size=n - 1, max_size=n - 1)))
    L = draw(st.floats(1e-7, 1e-2))
    rows = []
    for m in [1] + sizes:
        g = draw(st.floats(1e-7, 1e-1))
        os = g * draw(st.floats(0.01, 1.0))
        or_ = g * draw(st.floats(0.01, 1.0))
        rows.append((m, g, min(os, g), min(or_, g)))
    return ParamTable.from_rows(L, rows)
