"""Per-criterion PASS/FAIL summary for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n)`` are grouped by ``n``; a criterion
passes when every test in its group passed.  Tests may attach measured values
with ``record_property("detail", ...)``, which are echoed next to the verdict.
"""

from collections import defaultdict

import pytest

CRITERIA = range(1, 12)
_results = defaultdict(list)  # n -> [(nodeid, verdict, details)]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    details = [v for k, v in item.user_properties if k == "detail"]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            verdict = "XFAIL"
        elif rep.passed:
            verdict = "PASS"
        elif rep.skipped:
            verdict = "SKIP"
        else:
            verdict = "FAIL"
        _results[marker.args[0]].append((item.nodeid, verdict, details))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in CRITERIA:
        runs = _results.get(n)
        if not runs:
            tr.write_line(f"criterion {n:>2}: NOT RUN")
            continue
        verdicts = [v for _, v, _ in runs]
        ok = all(v == "PASS" for v in verdicts)
        tally = f"{verdicts.count('PASS')}/{len(verdicts)} tests passed"
        tr.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'} ({tally})")
        for nodeid, verdict, details in runs:
            if verdict != "PASS" or details:
                name = nodeid.split("::", 1)[-1]
                tr.write_line(f"    {verdict:<5} {name}")
                for d in details:
                    tr.write_line(f"          {d}")
