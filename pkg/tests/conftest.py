import math
import warnings

import pytest

from iotaoi.model import NetworkParams


def pytest_addoption(parser):
    parser.addoption(
        "--paper-scale",
        action="store_true",
        default=False,
        help="run the acceptance Monte Carlo at 10000 realizations x 1000 slots",
    )


@pytest.fixture(scope="session")
def paper_scale(request):
    return request.config.getoption("--paper-scale")


@pytest.fixture
def defaults():
    return NetworkParams()


@pytest.fixture(autouse=True)
def _quiet_density_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="DENSITY_RATIO_LOW")
        yield


def rel(a, b):
    return abs(a - b) / abs(b)


# window used by the Monte Carlo tests: 400 BSs on average
SIM_WINDOW = 20.0 / math.sqrt(1e-4)


# one line per acceptance criterion, emitted after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")
