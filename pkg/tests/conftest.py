import numpy as np
import pytest

from crackeval.distance import distance_transform

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    kw = report.keywords
    if "criterion" not in kw:
        return
    key = getattr(report, "_title", report.nodeid)
    _criteria.setdefault(key, {"outcome": "passed", "title": key})
    if report.outcome != "passed":
        _criteria[key]["outcome"] = report.outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._title = f"AC{m.args[0]} {m.args[1]}"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for v in sorted(_criteria.values(), key=lambda v: int(v["title"].split()[0][2:])):
        mark = "PASS" if v["outcome"] == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {v['title']}")


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    distance_transform(np.eye(3, dtype=bool))


@pytest.fixture
def segment():
    """Interior horizontal 1-px crack on a 64x96 canvas."""
    m = np.zeros((64, 96), dtype=bool)
    m[20, 15:75] = True
    return m
