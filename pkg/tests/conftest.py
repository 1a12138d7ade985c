import numpy as np
import pytest

from zoest import RandomSource, make_paper_test_function


@pytest.fixture
def rng():
    return RandomSource(20240, 0)


@pytest.fixture(scope="session")
def f500():
    return make_paper_test_function(500)


@pytest.fixture(scope="session")
def f100():
    return make_paper_test_function(100)


def random_symmetric(n, gen, scale=1.0):
    A = gen.uniform(-scale, scale, (n, n))
    return 0.5 * (A + A.T)


@pytest.fixture
def np_gen():
    return np.random.default_rng(7)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def record_acceptance(label, ok, detail):
    line = f"{label:<32} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
