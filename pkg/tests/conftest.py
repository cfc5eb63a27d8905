import math

import numpy as np
import pytest
from hypothesis import strategies as st

from seqnonlocal.measure import BlochDirection, Sharpness
from seqnonlocal.protocol import InitialState

ACCEPTANCE_LINES = []


@pytest.fixture
def ghz():
    return InitialState.ghz()


@pytest.fixture
def w_state():
    return InitialState.w()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


directions = st.builds(
    BlochDirection,
    st.floats(0, math.pi, allow_nan=False),
    st.floats(0, 2 * math.pi, allow_nan=False),
)
sharpnesses = st.builds(Sharpness, st.floats(1e-6, 1.0, allow_nan=False))
outcomes = st.sampled_from([1, -1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
