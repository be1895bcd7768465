import time

import numpy as np
import pytest

from vodsim.simulator import CHECK_ENV

_criteria_lines = []


@pytest.fixture(autouse=True)
def _runtime_checks(monkeypatch):
    # every simulation in the suite runs with per-tick invariant assertions
    monkeypatch.setenv(CHECK_ENV, "1")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class Criterion:
    """Times a block, records a PASS/FAIL line, and fails the test on overrun."""

    def __init__(self, number, title, limit=None):
        self.number, self.title, self.limit = number, title, limit
        self.detail = ""
        self.setup_seconds = 0.0  # time spent in shared fixtures on this criterion's behalf

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self._t0 + self.setup_seconds
        in_time = self.limit is None or elapsed < self.limit
        ok = exc_type is None and in_time
        limit = f", limit {self.limit:g}s" if self.limit is not None else ""
        detail = self.detail or (str(exc).splitlines()[0] if exc else "")
        line = f"{'PASS' if ok else 'FAIL'} criterion {self.number}: {self.title}"
        line += f" [{detail}; {elapsed:.2f}s{limit}]"
        _criteria_lines.append((self.number, line))
        print(line)
        if exc_type is None and not in_time:
            raise AssertionError(f"criterion {self.number} took {elapsed:.2f}s{limit}")
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _criteria_lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_criteria_lines):
            terminalreporter.write_line(line)
