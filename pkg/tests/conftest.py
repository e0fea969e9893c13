"""Per-criterion PASS/FAIL summary for the acceptance suite."""

from collections import defaultdict

_TITLES = {
    1: "affine geometry coverings exact",
    2: "Schonheim bound sweep",
    3: "greedy correctness",
    4: "idealized tree vs closed form",
    5: "greedy uncovered fraction vs closed form",
    6: "alpha(3,2) bracket",
    7: "induced covering end to end",
    8: "determinism and formats",
    9: "bookkeeping vs set-union oracle",
}

_outcomes: dict[int, list[str]] = defaultdict(list)
_criterion_of: dict[str, int] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criterion_of[item.nodeid] = m.args[0]


def pytest_runtest_logreport(report):
    n = _criterion_of.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[n].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(set(_criterion_of.values())):
        got = _outcomes.get(n)
        if not got:
            status = "NOT RUN"
        elif all(o == "passed" for o in got):
            status = "PASS"
        elif all(o == "skipped" for o in got):
            status = "SKIPPED"
        else:
            status = "FAIL"
        tr.write_line(f"criterion {n}: {status}  {_TITLES.get(n, '')}")
