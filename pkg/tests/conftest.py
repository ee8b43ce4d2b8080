import math

import pytest
from hypothesis import strategies as st

from nearfield_crb import ArrayGeometry, OfdmGrid, Scenario, SensingBudget, TargetLocation, default_scenario


@pytest.fixture
def defaults():
    return default_scenario()


@st.composite
def scenarios(draw, max_antennas=64, max_subcarriers=32, min_ratio=1.1, max_ratio=100.0):
    """Valid scenarios with r/R in [min_ratio, max_ratio] and B/f_c <= 0.5."""
    N = draw(st.integers(3, max_antennas))
    R = draw(st.floats(0.05, 2.0))
    r = R * draw(st.floats(min_ratio, max_ratio))
    theta = draw(st.floats(0, 2 * math.pi, exclude_max=True))
    fc = draw(st.floats(1e9, 1e11))
    M = draw(st.integers(1, max_subcarriers))
    B = fc * draw(st.floats(1e-4, 0.5))
    L = draw(st.integers(1, 512))
    snr_db = draw(st.floats(-20, 30))
    return Scenario(
        ArrayGeometry(N, R),
        TargetLocation(r, theta),
        OfdmGrid.from_bandwidth(fc, M, B, L),
        SensingBudget.from_snr_db(snr_db),
    )


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
