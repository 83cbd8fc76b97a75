import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> detail lines, filled in by test_acceptance
ACCEPTANCE: dict[int, list[str]] = {}
_OUTCOMES: dict[int, list[str]] = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m and (report.when == "call" or report.outcome != "passed"):
        _OUTCOMES.setdefault(int(m.group(1)), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(_OUTCOMES):
        ok = all(o == "passed" for o in _OUTCOMES[c])
        tr.write_line(f"criterion {c:2d}: {'PASS' if ok else 'FAIL'}")
        for line in ACCEPTANCE.get(c, []):
            tr.write_line(f"    {line}")
