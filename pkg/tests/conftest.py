import time
from contextlib import contextmanager

import pytest

_criterion_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, desc): top-level acceptance check, reported in the summary",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, desc = marker.args
    if rep.when == "call":
        _criterion_results[num] = (desc, rep.outcome)
    elif rep.when == "setup" and rep.outcome != "passed":
        _criterion_results[num] = (desc, rep.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance summary")
    for num in sorted(_criterion_results):
        desc, outcome = _criterion_results[num]
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {word} - {desc}")


@contextmanager
def runtime_budget(seconds: float):
    """Fail the test when the block exceeds its runtime budget."""
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f}s, budget {seconds}s"
