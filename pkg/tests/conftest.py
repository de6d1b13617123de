import numpy as np
import pytest

from robustlinopt import geometry

# criterion name -> (passed, detail); filled by test_acceptance, echoed at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def square():
    return geometry.box(2, 0.7)


@pytest.fixture(scope="session")
def square_basis(square):
    return geometry.exploration_basis(square, geometry.inscribed_ellipsoid(square))
