import os

import pytest

LONG_RUNS = os.environ.get("HOPFIELD_QSP_LONG") == "1"

_verdicts: list[tuple[str, bool, str]] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        print(line)
        _verdicts.append((name, bool(ok), detail))
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _verdicts:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
