"""Shared test plumbing: acceptance-criterion result registry.

Acceptance tests record one verdict per criterion; the terminal summary hook
prints them as explicit pass/fail lines so the suite's final output shows the
criterion-level outcome even when pytest captures stdout.
"""

ACCEPTANCE_RESULTS = []


def record_criterion(number, description, ok):
    ACCEPTANCE_RESULTS.append((number, description, bool(ok)))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, description, ok in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} [{verdict}] {description}")
