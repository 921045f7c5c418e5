"""Shared test plumbing: the acceptance criteria summary block.

Acceptance tests record one line per criterion; the hook below prints them
after the run so the evidence survives pytest's output capture.
"""

_CRITERION_LINES = []


def record_criterion(line: str) -> None:
    _CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.line(line)
