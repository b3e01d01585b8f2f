import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# filled by test_acceptance.py: (criterion id, label, passed, detail)
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, label, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{cid}] {label}  {detail}")
