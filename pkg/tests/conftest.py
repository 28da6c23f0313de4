import sys
import time

_START = time.perf_counter()
SUITE_BUDGET = 600.0


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("tests.test_acceptance")
    results = getattr(acc, "RESULTS", None)
    if not results:
        return
    elapsed = time.perf_counter() - _START
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in results:
        tr.write_line(line)
    ok = elapsed < SUITE_BUDGET
    tr.write_line(f"{'PASS' if ok else 'FAIL'}  6b full suite runtime  ({elapsed:.1f} s < {SUITE_BUDGET:.0f} s)")
