"""Shared fixtures and the acceptance summary hook.

Acceptance tests record a (number, description, passed, detail) tuple per
criterion leg before asserting; a terminal-summary hook prints one
aggregated PASS/FAIL line per criterion at the end of the run.
"""

import pytest

_acceptance_results = {}


@pytest.fixture
def record_criterion():
    def record(number, description, passed, detail=""):
        entry = _acceptance_results.setdefault(
            number, {"description": description, "passed": True, "details": []})
        entry["passed"] = entry["passed"] and bool(passed)
        if detail:
            entry["details"].append(f"{'ok' if passed else 'FAIL'}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_results):
        entry = _acceptance_results[number]
        verdict = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d}: {verdict}  {entry['description']}")
        for detail in entry["details"]:
            terminalreporter.write_line(f"      {detail}")
