import pytest

_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line; call with (tag, passed, detail)."""

    def record(tag, passed, detail):
        line = f"{tag}: {'PASS' if passed else 'FAIL'} - {detail}"
        _LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
