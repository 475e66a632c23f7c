"""Shared fixtures; collects the acceptance verdicts for the terminal summary."""

ACCEPTANCE = {}


def record(number, passed, detail):
    """Store (and print) the verdict of one acceptance criterion."""
    line = f"ACCEPTANCE {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
