import time

import pytest

from dofinetti.harness import ExperimentConfig, run_trials, summarize

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def default_sweep():
    """Summary rows of the full default sweep (100 repeats, 7 environment counts) and its runtime."""
    t0 = time.perf_counter()
    rows = summarize(run_trials(ExperimentConfig(master_seed=0)))
    return rows, time.perf_counter() - t0


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
