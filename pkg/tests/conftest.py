import pytest

from strongtime.grid import make_grid
from strongtime.states import BumpProfile, gaussian, make_test_vector
from strongtime.timeop import time_operator

PRESET_SYMBOLS = {
    "polynomial": ("x^2/2", {}),
    "log_abs": ("log(abs(x))", {}),
    "semirelativistic": ("sqrt(x^2 + m^2)", {"m": 1.0}),
    "fractional": ("(x^2 + m^2)^(alpha/2)", {"m": 1.0, "alpha": 0.6}),
}


@pytest.fixture(scope="session")
def grid():
    return make_grid(4096, 200.0)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(256, 60.0)


@pytest.fixture(scope="session")
def ops(grid):
    out = {name: time_operator(text, grid, params) for name, (text, params) in PRESET_SYMBOLS.items()}
    out["identity"] = time_operator("x", grid)
    return out


@pytest.fixture(scope="session")
def base_gaussian(grid):
    return gaussian(grid, 0.0, 5.0, 3.0)


@pytest.fixture(scope="session")
def vectors(ops, base_gaussian):
    """Default test vector (bump [1, 5]) certified for each operator."""
    return {name: make_test_vector(base_gaussian, BumpProfile(1.0, 5.0), op.Z) for name, op in ops.items()}


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
