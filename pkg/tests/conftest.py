"""Shared pytest configuration.

The acceptance module's tests are named test_criterion_NN_*; after the run
a one-line verdict per criterion is appended to the terminal summary, so
the gate can be read off directly.  A criterion backed by several test
functions passes only if all of them do; expected failures mark criteria
whose stated target is unattainable, with the analysis kept in the project
notes outside the package.
"""
from __future__ import annotations

import re

_CRITERION = re.compile(r"test_acceptance.*::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, set[str]] = {}
    for status in ("passed", "failed", "error", "xfailed", "xpassed", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            m = _CRITERION.search(getattr(report, "nodeid", ""))
            if m:
                outcomes.setdefault(int(m.group(1)), set()).add(status)
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(outcomes):
        seen = outcomes[n]
        if seen & {"failed", "error", "xpassed"}:
            verdict = "FAIL"
        elif "skipped" in seen:
            verdict = "FAIL (not executed)"
        elif "xfailed" in seen:
            verdict = "FAIL (expected: target unattainable, see notes)"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}")
