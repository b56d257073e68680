import pytest

from acceptance_report import REPORT


def pytest_terminal_summary(terminalreporter):
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(REPORT):
        ok, detail = REPORT[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
