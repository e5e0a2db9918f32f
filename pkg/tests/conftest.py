import json
import sys
from pathlib import Path

import pytest

from staticgrid.case_model import Branch, BusRecord, PowerCase, PQLoad, SlackGen
from staticgrid.fixtures import load_fixture

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))


def two_bus(p_load=0.5, q_load=0.0, x=0.1, r=0.0, v1=1.0, p_g0=None) -> PowerCase:
    """Slack bus 1 feeding a PQ load at bus 2 over one line."""
    return PowerCase(
        buses=(BusRecord(1, 230.0, 1.0, 0.0), BusRecord(2, 230.0, 1.0, 0.0)),
        sw=(SlackGen(1, 100.0, 230.0, v1, 0.0, 99.0, -99.0, 1.1, 0.9,
                     p_load if p_g0 is None else p_g0, 1.0, True, True),),
        pq=(PQLoad(2, 100.0, 230.0, p_load, q_load),),
        lines=(Branch(1, 2, 100.0, 230.0, 60.0, 0.0, None, r, x, 0.0),),
    )


@pytest.fixture(scope="session")
def desk3():
    return load_fixture("desk3")


@pytest.fixture(scope="session")
def desk9():
    return load_fixture("desk9")


@pytest.fixture(scope="session")
def desk3_reference():
    return json.loads((TESTS / "data" / "desk3_reference.json").read_text())


@pytest.fixture(scope="session")
def desk9_reference():
    return json.loads((TESTS / "data" / "desk9_reference.json").read_text())


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
