import pytest

_REPORT_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT_KEY] = []


@pytest.fixture
def acceptance_report(request):
    """Call with ``(number, title, passed, detail)``; lines are printed in the summary."""
    lines = request.config.stash[_REPORT_KEY]

    def record(number, title, passed, detail):
        lines.append((number, f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {title} | {detail}"))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda item: item[0]):
        terminalreporter.write_line(line)
