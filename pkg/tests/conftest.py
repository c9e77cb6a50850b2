import numpy as np
import pytest

from matspline import build, builtin_problem

J = np.array([[1, 0], [1, 1]], dtype=complex)
PAPER_A = np.array([[1, 0], [2, 1]], dtype=complex)


@pytest.fixture(scope="session")
def paper():
    return builtin_problem("paper-example")


@pytest.fixture(scope="session")
def paper_spline(paper):
    ivp, _ = paper
    return build(ivp, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results):
            terminalreporter.write_line(line)
