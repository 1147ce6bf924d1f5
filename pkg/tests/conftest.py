import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS: dict = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the end-of-run report.

    Usage: ``criterion(3, ok, "detail")`` records and then asserts ``ok``.
    """
    def record(number: int, ok: bool, detail: str = ""):
        previous = _RESULTS.get(number)
        ok = bool(ok) and (previous is None or previous[0])
        if previous is not None and previous[1]:
            detail = f"{previous[1]}; {detail}" if detail else previous[1]
        _RESULTS[number] = (ok, detail)
        assert ok, f"criterion {number} failed: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        ok, detail = _RESULTS[number]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}"
        terminalreporter.write_line(f"{line}  {detail}" if detail else line)
