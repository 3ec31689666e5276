import pytest

_REPORT = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def add(number, title, ok, detail):
        _REPORT[number] = f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail}"
        print(_REPORT[number])
        return ok
    return add


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_REPORT):
            terminalreporter.write_line(_REPORT[number])
