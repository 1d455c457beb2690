"""Shared pytest fixtures and the acceptance-criteria terminal summary."""

import numpy as np
import pytest

from wspsignal import SurvivalSample, TestSpec, WeibullParams, sample_weibull

# the class name starts with "Test"; keep pytest from trying to collect it
TestSpec.__test__ = False

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def weibull_sample(rng):
    """A right-censored cohort drawn from a non-constant-hazard Weibull."""
    params = WeibullParams(shape=1.4, scale=1.0 / 400.0)
    window = 365.0
    t = sample_weibull(params, 3000, rng)
    events = t <= window
    return SurvivalSample(np.where(events, t, window), events, window)


@pytest.fixture
def exponential_sample(rng):
    """A right-censored cohort from the constant-hazard null."""
    params = WeibullParams(shape=1.0, scale=1.0 / 2000.0)
    window = 365.0
    t = sample_weibull(params, 8000, rng)
    events = t <= window
    return SurvivalSample(np.where(events, t, window), events, window)
