"""Shared fixtures and the acceptance pass/fail summary."""

from __future__ import annotations

import time

import pytest

from klbounds.battery import run_battery
from klbounds.clt import DEFAULT_N_LIST, SumSpec, clt_sweep, llt_mixture
from klbounds.density import STANDARD_NORMAL, Grid

CRITERIA = {
    1: "oracle correctness",
    2: "bound dominance battery",
    3: "derived-constant audit",
    4: "closed-form derived values",
    5: "local-limit rate",
    6: "entropic rate consistency",
    7: "conditional CLT",
    8: "L2 and L1 convergence of N(1/n, 1+1/n)",
    9: "determinism",
}

_details: dict[int, str] = {}
_outcomes: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def record():
    """record(n, detail) stores the measured numbers printed in the summary line."""

    def _record(n: int, detail: str) -> None:
        _details[n] = detail

    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = int(mark.args[0])
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _outcomes[n] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        status = _outcomes.get(n, "NOT RUN")
        detail = _details.get(n, "")
        terminalreporter.write_line(f"criterion {n} [{title}]: {status}  {detail}".rstrip())


# ---------------------------------------------------------------------------
# expensive shared computations


@pytest.fixture(scope="session")
def battery():
    """(BatteryResult, seconds) for the default 200-pair battery."""
    t0 = time.perf_counter()
    res = run_battery()
    return res, time.perf_counter() - t0


@pytest.fixture(scope="session")
def standard_grid():
    return Grid.symmetric(16.0, 4096)


@pytest.fixture(scope="session")
def llt_sweep(standard_grid):
    """(points, seconds) for the skewed-mixture sweep over n = 2..256."""
    t0 = time.perf_counter()
    pts = clt_sweep(SumSpec(llt_mixture(), DEFAULT_N_LIST, standard_grid))
    return pts, time.perf_counter() - t0


@pytest.fixture(scope="session")
def gaussian_sweep(standard_grid):
    t0 = time.perf_counter()
    pts = clt_sweep(SumSpec(STANDARD_NORMAL, DEFAULT_N_LIST, standard_grid))
    return pts, time.perf_counter() - t0
