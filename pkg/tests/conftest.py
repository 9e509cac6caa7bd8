import pytest

_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion."""
    def record(criterion, passed, detail=""):
        line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
