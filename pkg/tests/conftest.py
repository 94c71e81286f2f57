"""Shared fixtures and the headline pass/fail summary.

Heavy replicated studies are session-scoped so the target and trend
checks reuse the same runs. Each headline check registers one line here;
the terminal summary prints them all, pass or fail, in registration
order.
"""

import time

import pytest

ACCEPTANCE_RESULTS = []

# Populations sized so every study clears its runtime budget with room
# while keeping the scale window wide enough for a stable fit.
SUPPORT_POP = {0.12: 60_000, 0.25: 60_000, 0.4: 100_000, 1.0: 60_000}
ALLPOINTS_POP = {0.12: 100_000, 0.4: 100_000, 1.0: 50_000}
STUDY_DT = 0.02
STUDY_SEED = 20260822


def record(criterion, passed, detail):
    ACCEPTANCE_RESULTS.append((criterion, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("headline checks")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}: {detail}")


def _timed_dimension_study(beta, mode, pop):
    from hypbbm.analysis.protocols import dimension_study

    t0 = time.perf_counter()
    report = dimension_study(
        beta=beta,
        mode=mode,
        replicates=20,
        target_population=pop,
        dt=STUDY_DT,
        seed=STUDY_SEED,
    )
    return report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def support_studies():
    return {
        beta: _timed_dimension_study(beta, "support", pop)
        for beta, pop in SUPPORT_POP.items()
    }


@pytest.fixture(scope="session")
def allpoints_studies():
    return {
        beta: _timed_dimension_study(beta, "all-points", pop)
        for beta, pop in ALLPOINTS_POP.items()
    }
