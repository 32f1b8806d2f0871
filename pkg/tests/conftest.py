import json
import os
from pathlib import Path

import pytest

from zinbspc import ZinbParams
from zinbspc.application.io import ingest_counts

DATA = Path(__file__).parent / "data"

# The real owl-nestling series is not redistributed; point this at a CSV
# export (column SiblingNegotiation) to enable the checks that need it.
OWLS_ENV = "ZINBSPC_OWLS_CSV"


@pytest.fixture(scope="session")
def base_params():
    return ZinbParams(k=1.0, p=0.4, theta=0.85)


@pytest.fixture(scope="session")
def reference_tables():
    return json.loads((DATA / "reference_tables.json").read_text())


@pytest.fixture(scope="session")
def joint_shifts():
    return json.loads((DATA / "reference_joint_shifts.json").read_text())


@pytest.fixture(scope="session")
def synthetic_path():
    return DATA / "owls_synthetic.csv"


@pytest.fixture(scope="session")
def synthetic_counts(synthetic_path):
    return ingest_counts(synthetic_path, "SiblingNegotiation")


def owls_path():
    path = os.environ.get(OWLS_ENV)
    return Path(path) if path and Path(path).is_file() else None


@pytest.fixture(scope="session")
def owls_counts():
    path = owls_path()
    if path is None:
        pytest.skip(f"set {OWLS_ENV} to the owl-nestling CSV to run this check")
    return ingest_counts(path, "SiblingNegotiation")


# --- acceptance report ------------------------------------------------------

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call" and not (call.when == "setup" and call.excinfo is not None):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "passed": 0, "failed": 0, "skipped": []})
    if call.excinfo is None:
        entry["passed"] += 1
    elif call.excinfo.errisinstance(pytest.skip.Exception):
        entry["skipped"].append(item.name)
    else:
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "FAIL" if e["failed"] or not e["passed"] else "PASS"
        line = f"{status} criterion {number}: {e['title']} ({e['passed']} passed, {e['failed']} failed"
        if e["skipped"]:
            line += f", skipped: {', '.join(e['skipped'])}"
        terminalreporter.write_line(line + ")")
