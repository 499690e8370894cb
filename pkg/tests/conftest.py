"""Collects the acceptance verdicts and prints them after the run."""

ACCEPTANCE = []  # (criterion, passed, detail) in the order recorded


def record(criterion, passed, detail):
    ACCEPTANCE.append((criterion, bool(passed), detail))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} | {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} | {detail}")
