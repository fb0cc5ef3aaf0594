import numpy as np
import pytest

from spinspec.catalog import pauli_symbol, winding_symbol
from spinspec.pipeline import analyze_problem
from spinspec.problem import ProblemSpec


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(RESULTS):
        terminalreporter.write_line(
            "criterion %d [%s] %s: %s" % (number, "PASS" if passed else "FAIL", title, detail)
        )


@pytest.fixture(scope="session")
def solvable_spec():
    return ProblemSpec(symbol=winding_symbol(2), grid=32, truncation_m=4)


@pytest.fixture(scope="session")
def solvable_analysis(solvable_spec):
    return analyze_problem(solvable_spec)


@pytest.fixture(scope="session")
def flat_spec():
    return ProblemSpec(symbol=pauli_symbol(), grid=16, truncation_m=2)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
