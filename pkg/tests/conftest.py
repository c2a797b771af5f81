"""Shared test plumbing: the acceptance-criteria report.

Acceptance tests record one status line each; the lines are echoed in a
dedicated section of the terminal summary so they stay visible even when
pytest captures per-test stdout.
"""

ACCEPTANCE_LINES: list[str] = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
