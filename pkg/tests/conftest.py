"""Shared test plumbing: the acceptance-criterion summary."""

_criterion_lines = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    """Queue one acceptance line for the end-of-run summary."""
    verdict = "PASS" if passed else "FAIL"
    _criterion_lines.append(f"{verdict}  {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _criterion_lines:
        terminalreporter.write_line(line)
