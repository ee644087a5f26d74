import pytest

_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, text = marker.args
    passed = call.excinfo is None
    prev = _CRITERIA.get(number, (text, True))
    _CRITERIA[number] = (text, prev[1] and passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, passed = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {number}: {text}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240607)
