"""Synthetic cohort generation and the Monte Carlo scenario grid.

Cohorts follow the generating process used throughout: a binomial number
of background events with times drawn from the constant-hazard null model
(exponential, conditioned on falling inside the observation window), plus
a binomial number of drug-related events with times Gaussian around a
per-cohort random mean day (truncated to the window by resampling),
everyone else censored at the window end. Seeding is derived per
(scenario, rep) so grids are reproducible and parallelizable.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .detect import COMBINATIONS, TestSpec, decide, evaluate_components
from .models import SurvivalSample

DEFAULT_WINDOW = 365.0
DEFAULT_SD_DAYS = (3.7, 18.3)

OUTCOME_COLUMNS = (
    "scenario_id", "n_obs", "background_rate", "adr_rate_rel", "adr_sd_days",
    "rep", "combination", "significance", "signal",
    "p_alpha1", "p_alpha05", "p_nu", "p_gamma",
    "status_wsp", "status_cwsp", "status_pwsp", "n_events",
)


@dataclass(frozen=True)
class Scenario:
    """One cell of the simulation grid."""

    n_obs: int
    background_rate: float
    adr_rate_rel: float
    adr_sd_rel: float
    window_end: float = DEFAULT_WINDOW
    replications: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if self.n_obs <= 0:
            raise ValueError("n_obs must be positive")
        if not 0.0 < self.background_rate < 1.0:
            raise ValueError("background_rate must be in (0, 1)")
        if self.adr_rate_rel < 0.0:
            raise ValueError("adr_rate_rel must be nonnegative")
        if self.adr_sd_rel <= 0.0:
            raise ValueError("adr_sd_rel must be positive")
        if self.background_rate * (1.0 + self.adr_rate_rel) > 1.0:
            raise ValueError("expected events exceed n_obs")

    @property
    def adr_sd_days(self) -> float:
        return self.adr_sd_rel * self.window_end

    @property
    def scenario_id(self) -> str:
        return (
            f"n{self.n_obs}_bg{self.background_rate:g}"
            f"_adr{self.adr_rate_rel:g}_sd{self.adr_sd_days:g}"
        )


@dataclass(frozen=True)
class CohortTruth:
    has_adr_component: bool
    adr_mean_day: float | None
    n_background_events: int
    n_adr_events: int


@dataclass(frozen=True)
class GeneratedCohort:
    sample: SurvivalSample
    truth: CohortTruth


def _derived_seed(sc: Scenario, rep_index: int) -> np.random.SeedSequence:
    # stable integer key over the scenario fields; float fields at ppb resolution
    return np.random.SeedSequence(
        [
            sc.master_seed,
            sc.n_obs,
            round(sc.background_rate * 1e9),
            round(sc.adr_rate_rel * 1e9),
            round(sc.adr_sd_rel * 1e9),
            round(sc.window_end * 1e3),
            rep_index,
        ]
    )


def generate_cohort(sc: Scenario, rep_index: int) -> GeneratedCohort:
    if rep_index >= sc.replications:
        raise ValueError("rep_index out of range")
    rng = np.random.default_rng(_derived_seed(sc, rep_index))
    n = sc.n_obs
    last_day = int(sc.window_end)
    n_bg = int(rng.binomial(n, sc.background_rate))
    n_adr = int(rng.binomial(n, sc.background_rate * sc.adr_rate_rel))
    if n_bg + n_adr > n:
        raise ValueError("drawn event count exceeds n_obs")
    # background times follow the constant-hazard null exactly: exponential
    # with P(event by window_end) = background_rate, conditioned on the window.
    # Anything else (e.g. uniform days) tilts the fitted shape away from 1 in
    # proportion to the event fraction and mis-calibrates every test.
    lam = -np.log1p(-sc.background_rate) / sc.window_end
    bg_times = -np.log1p(-rng.random(n_bg) * sc.background_rate) / lam
    adr_mean = None
    adr_times = np.empty(0)
    if sc.adr_rate_rel > 0.0:
        adr_mean = float(rng.uniform(1.0, float(last_day)))
        adr_times = np.rint(rng.normal(adr_mean, sc.adr_sd_days, n_adr))
        bad = (adr_times < 1.0) | (adr_times > last_day)
        while bad.any():  # truncate by resampling, no boundary atoms
            adr_times[bad] = np.rint(rng.normal(adr_mean, sc.adr_sd_days, int(bad.sum())))
            bad = (adr_times < 1.0) | (adr_times > last_day)
    times = np.concatenate(
        [bg_times, adr_times, np.full(n - n_bg - n_adr, sc.window_end)]
    )
    events = np.zeros(n, dtype=bool)
    events[: n_bg + n_adr] = True
    sample = SurvivalSample(times, events, sc.window_end)
    truth = CohortTruth(sc.adr_rate_rel > 0.0, adr_mean, n_bg, n_adr)
    return GeneratedCohort(sample, truth)


@dataclass(frozen=True)
class OutcomeRow:
    """One line of the outcome table: a (scenario, rep, spec) decision plus components."""

    scenario: Scenario
    rep: int
    combination: str
    significance: float
    signal: bool
    p_alpha1: float | None
    p_alpha05: float | None
    p_nu: float | None
    p_gamma: float | None
    status_wsp: str
    status_cwsp: str
    status_pwsp: str
    n_events: int


def _needed_components(specs):
    names = []
    for spec in specs:
        for m in ("wsp", "cwsp", "pwsp"):
            if m in _members(spec.combination) and m not in names:
                names.append(m)
    return tuple(names)


def _members(combination):
    from .detect import _MEMBERS

    return _MEMBERS[combination]


def _cohort_record(task):
    """Worker: generate one cohort and run each base test once."""
    sc, rep, names = task
    cohort = generate_cohort(sc, rep)
    comps = evaluate_components(cohort.sample, names)
    return sc, rep, comps, cohort.sample.n_events


def _rows_for_record(record, specs):
    sc, rep, comps, n_events = record

    def pv(name, i):
        c = comps.get(name)
        if c is None or c.status != "converged" or len(c.p_values) <= i:
            return None
        return c.p_values[i]

    def status(name):
        c = comps.get(name)
        return c.status if c is not None else ""

    rows = []
    for spec in specs:
        outcome = decide(comps, spec)
        rows.append(
            OutcomeRow(
                scenario=sc,
                rep=rep,
                combination=spec.combination,
                significance=spec.significance,
                signal=outcome.signal,
                p_alpha1=pv("wsp", 0),
                p_alpha05=pv("cwsp", 0),
                p_nu=pv("pwsp", 0),
                p_gamma=pv("pwsp", 1),
                status_wsp=status("wsp"),
                status_cwsp=status("cwsp"),
                status_pwsp=status("pwsp"),
                n_events=n_events,
            )
        )
    return rows


def run_grid(grid, specs, threads: int = 1):
    """Evaluate every (scenario, rep, spec) triple; each cohort is generated once
    and shared across specs. Output order is deterministic and independent of
    the thread count."""
    grid = list(grid)
    specs = list(specs)
    if not grid or not specs:
        raise ValueError("grid and specs must be nonempty")
    names = _needed_components(specs)
    tasks = [(sc, rep, names) for sc in grid for rep in range(sc.replications)]
    rows = []
    if threads <= 1:
        records = map(_cohort_record, tasks)
    else:
        executor = ProcessPoolExecutor(max_workers=threads)
        chunk = max(1, len(tasks) // (8 * threads))
        records = executor.map(_cohort_record, tasks, chunksize=chunk)
    try:
        for record in records:
            rows.extend(_rows_for_record(record, specs))
    finally:
        if threads > 1:
            executor.shutdown()
    return rows


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def write_outcomes(rows, path) -> None:
    """Write the outcome table CSV with the documented column order."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OUTCOME_COLUMNS)
        for r in rows:
            sc = r.scenario
            writer.writerow(
                [
                    sc.scenario_id,
                    sc.n_obs,
                    _fmt(sc.background_rate),
                    _fmt(sc.adr_rate_rel),
                    _fmt(sc.adr_sd_days),
                    r.rep,
                    r.combination,
                    _fmt(r.significance),
                    int(r.signal),
                    _fmt(r.p_alpha1),
                    _fmt(r.p_alpha05),
                    _fmt(r.p_nu),
                    _fmt(r.p_gamma),
                    r.status_wsp,
                    r.status_cwsp,
                    r.status_pwsp,
                    r.n_events,
                ]
            )


def default_grid(
    n_obs=(5000, 10000, 20000, 50000),
    background_rates=(0.01, 0.05, 0.10),
    adr_rates=(0.0, 0.1, 0.2, 0.5, 1.0),
    sd_days=DEFAULT_SD_DAYS,
    window_end=DEFAULT_WINDOW,
    replications=1000,
    master_seed=0,
):
    """The full simulation grid (cartesian product of the study's parameter lists)."""
    return [
        Scenario(
            n_obs=n,
            background_rate=bg,
            adr_rate_rel=adr,
            adr_sd_rel=sd / window_end,
            window_end=window_end,
            replications=replications,
            master_seed=master_seed,
        )
        for n in n_obs
        for bg in background_rates
        for adr in adr_rates
        for sd in sd_days
    ]


def default_specs(combinations=COMBINATIONS, levels=None):
    if levels is None:
        levels = [round(0.01 * k, 2) for k in range(1, 11)]
    return [TestSpec(c, s) for c in combinations for s in levels]
