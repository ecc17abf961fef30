"""Shared pytest hooks: acceptance-criterion verdict summary.

Each test in ``test_acceptance.py`` named ``test_criterion_NN_<label>``
covers one acceptance criterion.  The hooks below collect their outcomes
and repeat them as one ``CRITERION NN [label]: PASS/FAIL`` line each in
the terminal summary, so the verdicts survive output capture.
"""

import re

_CRITERION_RE = re.compile(r"test_criterion_(\d+)_(\w+)")
_verdicts = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = _CRITERION_RE.search(report.nodeid)
    if m is None:
        return
    number, label = m.groups()
    outcome = {"passed": "PASS", "failed": "FAIL"}.get(
        report.outcome, report.outcome.upper())
    _verdicts[int(number)] = (label.replace("_", "-"), outcome)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        label, outcome = _verdicts[number]
        terminalreporter.write_line(
            f"CRITERION {number:02d} [{label}]: {outcome}")
