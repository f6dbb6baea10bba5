import time

import pytest

from quantar.ar1 import DEFAULT_BOX, THETA_STAR
from quantar.experiments import consistency_experiment

# Master seed of the consistency study, frozen after the pilot run.
CONSISTENCY_SEED = 20261014
CONSISTENCY_N = (250, 1000, 4000)
CONSISTENCY_REPS = 20

_RESULTS_KEY = pytest.StashKey[dict]()
# Wall-clock seconds of the session consistency run, filled in by the fixture.
CONSISTENCY_TIMING = {}


def pytest_configure(config):
    config.stash[_RESULTS_KEY] = {}


@pytest.fixture
def record_criterion(request):
    """Record a PASS/FAIL line for one acceptance criterion."""
    results = request.config.stash[_RESULTS_KEY]

    def record(number: int, name: str, passed: bool, detail: str = ""):
        results[number] = (name, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        name, passed, detail = results[number]
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def consistency_run():
    """The full consistency study; shared by the estimator and acceptance tests."""
    t0 = time.perf_counter()
    report = consistency_experiment(THETA_STAR, DEFAULT_BOX, CONSISTENCY_N,
                                    reps=CONSISTENCY_REPS, seed=CONSISTENCY_SEED,
                                    keep_estimates=True)
    CONSISTENCY_TIMING["elapsed"] = time.perf_counter() - t0
    return report
