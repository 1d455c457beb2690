"""Shape-parameter signal tests and their combinations.

A signal means the fitted hazard is non-constant: the Weibull shape
(full data or data censored at mid-window) or both PGW shape parameters
differ significantly from 1. Component tests degrade to "no signal"
when a fit is not estimable; they never raise for that reason.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fit import FitResult, fit_pgw, fit_weibull, shape_pvalue
from .models import SurvivalSample

COMBINATIONS = ("WSP", "cWSP", "pWSP", "dWSP", "WSP-pWSP", "dWSP-pWSP")

# member component tests of each combination
_MEMBERS = {
    "WSP": ("wsp",),
    "cWSP": ("cwsp",),
    "pWSP": ("pwsp",),
    "dWSP": ("wsp", "cwsp"),
    "WSP-pWSP": ("wsp", "pwsp"),
    "dWSP-pWSP": ("wsp", "cwsp", "pwsp"),
}


@dataclass(frozen=True)
class TestSpec:
    combination: str
    significance: float

    def __post_init__(self):
        if self.combination not in COMBINATIONS:
            raise ValueError(f"unknown combination {self.combination!r}")
        if not 0.0 < self.significance < 1.0:
            raise ValueError("significance must be in (0, 1)")


@dataclass(frozen=True)
class ComponentResult:
    """One base test: p-values for its tested shape parameter(s) and fit status."""

    name: str  # "wsp", "cwsp", "pwsp"
    p_values: tuple[float, ...]
    status: str  # "converged" or "not_estimable"

    def signals_at(self, significance: float) -> bool:
        # pWSP needs both shape parameters significant; a failed fit never signals
        return self.status == "converged" and all(p < significance for p in self.p_values)


@dataclass(frozen=True)
class TestOutcome:
    signal: bool
    components: tuple[ComponentResult, ...]


def censor_at(s: SurvivalSample, cut: float) -> SurvivalSample:
    """Administratively censor at `cut`: later observations become censored at the cut."""
    if not 0.0 < cut <= s.window_end:
        raise ValueError("cut must satisfy 0 < cut <= window_end")
    late = s.times > cut
    times = np.where(late, cut, s.times)
    events = s.events & ~late
    return SurvivalSample(times, events, cut)


def _shape_component(name: str, fit: FitResult, indices) -> ComponentResult:
    if not fit.converged:
        return ComponentResult(name, (), "not_estimable")
    return ComponentResult(name, tuple(shape_pvalue(fit, i) for i in indices), "converged")


def _wsp_component(s: SurvivalSample, name: str = "wsp") -> ComponentResult:
    if s.n_events == 0:
        return ComponentResult(name, (), "not_estimable")
    return _shape_component(name, fit_weibull(s), (0,))


def _cwsp_component(s: SurvivalSample) -> ComponentResult:
    return _wsp_component(censor_at(s, s.window_end / 2.0), name="cwsp")


def _pwsp_component(s: SurvivalSample) -> ComponentResult:
    if s.n_events == 0:
        return ComponentResult("pwsp", (), "not_estimable")
    return _shape_component("pwsp", fit_pgw(s), (0, 1))


_COMPONENT_FNS = {"wsp": _wsp_component, "cwsp": _cwsp_component, "pwsp": _pwsp_component}


def evaluate_components(s: SurvivalSample, names=("wsp", "cwsp", "pwsp")):
    """Run the requested base tests once; decisions at any level follow from the p-values."""
    return {name: _COMPONENT_FNS[name](s) for name in names}


def decide(components, spec: TestSpec) -> TestOutcome:
    """Apply a combination's decision rule to precomputed component results."""
    members = _MEMBERS[spec.combination]
    comps = tuple(components[m] for m in members)
    return TestOutcome(any(c.signals_at(spec.significance) for c in comps), comps)


def run_combination(s: SurvivalSample, spec: TestSpec) -> TestOutcome:
    return decide(evaluate_components(s, _MEMBERS[spec.combination]), spec)


def run_wsp(s: SurvivalSample, significance: float) -> TestOutcome:
    return run_combination(s, TestSpec("WSP", significance))


def run_cwsp(s: SurvivalSample, significance: float) -> TestOutcome:
    return run_combination(s, TestSpec("cWSP", significance))


def run_pwsp(s: SurvivalSample, significance: float) -> TestOutcome:
    return run_combination(s, TestSpec("pWSP", significance))
