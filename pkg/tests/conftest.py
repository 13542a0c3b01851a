from __future__ import annotations

import logging
import sys
from pathlib import Path

import pytest

from stnbt import fixtures

sys.path.insert(0, str(Path(__file__).parent))
# invalid-plan runs log backward links at WARNING; keep test output quiet
logging.getLogger("stnbt.stn").setLevel(logging.ERROR)

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def matchcellar():
    return fixtures.load("matchcellar")


@pytest.fixture(scope="session")
def assembly():
    return fixtures.load("assembly")


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
