import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    outcomes = defaultdict(list)
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if not hasattr(rep, "when"):
                continue
            props = dict(rep.user_properties)
            if "criterion" not in props:
                continue
            if rep.when == "call" or rep.outcome != "passed":
                outcomes[props["criterion"]].append(rep.outcome == "passed")
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(outcomes):
        verdict = "PASS" if all(outcomes[number]) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}")
