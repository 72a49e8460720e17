import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from cliffordlearn.gf2pauli import PauliOperator

settings.register_profile(
    "default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def paulis(draw, n=None, max_n=8, phase=True):
    if n is None:
        n = draw(st.integers(1, max_n))
    x = draw(st.integers(0, 2**n - 1))
    z = draw(st.integers(0, 2**n - 1))
    e = draw(st.integers(0, 3)) if phase else 0
    return PauliOperator(n, x, z, e)


@st.composite
def pauli_triples(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    return tuple(draw(paulis(n=n)) for _ in range(3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def phase_aligned(a, b):
    """Return b times the phase that best aligns it with a."""
    t = np.vdot(b, a)
    return b * (t / abs(t))


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
