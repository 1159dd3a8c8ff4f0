import numpy as np
import pytest

from zakident import ModelParams, draw_coefficients


def drawn(L, T=1.0, Nt=4, Nf=4, seed=0):
    return draw_coefficients(ModelParams(L, T, Nt, Nf), np.random.default_rng([seed, L]))


@pytest.fixture(scope="session")
def M3():
    return drawn(3)


@pytest.fixture(scope="session")
def M4():
    return drawn(4)


@pytest.fixture(scope="session")
def M5():
    return drawn(5)


@pytest.fixture(scope="session")
def M6():
    return drawn(6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
