import os
import random
import sys

import pytest

from cayleyflows.tower import GroupSpec


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the long certificate runs")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running (enable with --runslow or CAYLEYFLOWS_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow") or os.environ.get("CAYLEYFLOWS_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return random.Random(20061019)


@pytest.fixture(scope="session")
def sol22():
    return GroupSpec(2, 2)


def random_word(rng, m, n):
    letters = [x for i in range(1, m + 1) for x in (i, -i)]
    out = []
    while len(out) < n:
        x = rng.choice(letters)
        if out and out[-1] == -x:
            continue
        out.append(x)
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 10):
        terminalreporter.write_line(results.get(n, f"criterion {n} NOT RUN (deselected, or slow without --runslow)"))
