import numpy as np
import pytest
from hypothesis import strategies as st

EX1 = np.array([[80, -8, 4], [-8, 17, 32], [4, 32, 65]], dtype=float)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=8)


def cgauss(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_psd(rng, m, r):
    B = cgauss(rng, m, r)
    return B @ B.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
