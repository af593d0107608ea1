"""Suite-wide hooks: the acceptance table printed after the run."""

import pytest

_lines = {}


@pytest.fixture
def criterion():
    """Recorder for acceptance checks; each call files one summary line."""
    def record(num, ok, detail):
        _lines[num] = (bool(ok), str(detail))
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _lines:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_lines):
        ok, detail = _lines[num]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict} - {detail}")
