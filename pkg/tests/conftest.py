import json
import random

import pytest

from macrofacet import fixtures


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def networking():
    return fixtures.networking_macro_facets()


@pytest.fixture
def fixture_dir(tmp_path):
    """The shipped fixture files, written fresh into a temp directory."""
    for rel, payload in fixtures.fixture_files().items():
        path = tmp_path / "fixtures" / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return tmp_path / "fixtures"


def pytest_configure(config):
    config._criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and report.when == "call":
        item.config._criteria.append((marker.args[0], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = getattr(config, "_criteria", [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, duration in rows:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {label}  ({duration:.2f}s)")
