import pytest

_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion():
    def emit(number: int, ok: bool, title: str, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}"
        if detail:
            line += f"  ({detail})"
        _LINES.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
