import json
import pathlib

import numpy as np
import pytest

DATA = pathlib.Path(__file__).parent / "data"
_RESULTS = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def frozen():
    return json.loads((DATA / "frozen.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.fixture
def acceptance(request):
    """Record one acceptance line: acceptance(number, title, passed, detail)."""
    table = request.config.stash[_RESULTS]

    def record(number, title, passed, detail=""):
        table[number] = (title, bool(passed), detail)

    record.table = table
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_RESULTS, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        title, passed, detail = table[number]
        terminalreporter.write_line(
            f"[{'PASS' if passed else 'FAIL'}] {number}. {title}" + (f": {detail}" if detail else ""))
