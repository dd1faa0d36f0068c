import traceback

import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Run one acceptance check, print its PASS/FAIL line and fail the test on FAIL.

    The check returns ``(ok, detail)``; an exception counts as FAIL.
    """
    lines = request.config.stash[_LINES]

    def record(number: int, title: str, check) -> None:
        try:
            ok, detail = check()
        except Exception as exc:  # reported as a FAIL line, then re-raised by the assert
            ok, detail = False, "".join(traceback.format_exception_only(type(exc), exc)).strip()
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{detail}]"
        print(line)
        lines.append(line)
        assert ok, line

    return record
