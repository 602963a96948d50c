from pathlib import Path

import numpy as np
import pytest

from gevrey_nse.config import read_config
from gevrey_nse.solver import run
from gevrey_nse.spectral import Grid

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid8():
    return Grid(8)


@pytest.fixture(scope="session")
def grid16():
    return Grid(16)


def _run(name):
    cfg = read_config(CONFIGS / name)
    return cfg, run(cfg)


@pytest.fixture(scope="session")
def small_data_run():
    """32^3 small-data run to t = 5 on the 2pi box."""
    return _run("decay_small_data.ini")


@pytest.fixture(scope="session")
def wide_box_run():
    """The same data on the 4pi box."""
    return _run("split_4pi.ini")


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def record_acceptance(label: str, passed: bool, detail: str):
    line = f"{'PASS' if passed else 'FAIL'} criterion {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
