import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    """Replay the acceptance criteria pass/fail lines outside capture."""
    try:
        from test_acceptance import ANNOUNCEMENTS
    except ImportError:
        return
    if ANNOUNCEMENTS:
        terminalreporter.section("acceptance criteria")
        for line in ANNOUNCEMENTS:
            terminalreporter.write_line(line)
