"""Aggregation of simulation outcomes: confusion counts, AUC, rankings,
power estimates and sample-size search.

Background-only replicates (adr_rate_rel = 0) are the negatives; replicates
with a drug-related component are the positives. AUC for a single operating
point is the trapezoid through (0,0), (fp,tp), (1,1): (tp + 1 - fp) / 2.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .detect import TestSpec
from .simulate import Scenario, run_grid

REQUIRED_COLUMNS = ("combination", "significance", "signal", "adr_rate_rel")


def rows_to_frame(rows) -> pd.DataFrame:
    """Flatten OutcomeRow objects into the outcome-table DataFrame."""
    return pd.DataFrame(
        {
            "scenario_id": [r.scenario.scenario_id for r in rows],
            "n_obs": [r.scenario.n_obs for r in rows],
            "background_rate": [r.scenario.background_rate for r in rows],
            "adr_rate_rel": [r.scenario.adr_rate_rel for r in rows],
            "adr_sd_days": [r.scenario.adr_sd_days for r in rows],
            "rep": [r.rep for r in rows],
            "combination": [r.combination for r in rows],
            "significance": [r.significance for r in rows],
            "signal": [int(r.signal) for r in rows],
            "n_events": [r.n_events for r in rows],
        }
    )


def summarize(outcomes: pd.DataFrame, group_keys=("background_rate",)) -> pd.DataFrame:
    """Per (combination, significance, *group_keys): FP/N/TP/P counts, fp, tp,
    accuracy and single-point AUC. Groups missing either class get auc = NaN
    and auc_defined = False."""
    missing = [c for c in REQUIRED_COLUMNS if c not in outcomes.columns]
    if missing:
        raise ValueError(f"outcome table is missing columns: {missing}")
    keys = ["combination", "significance", *group_keys]
    out = []
    for key, grp in outcomes.groupby(keys, sort=True):
        neg = grp[grp["adr_rate_rel"] == 0.0]
        pos = grp[grp["adr_rate_rel"] > 0.0]
        n, p = len(neg), len(pos)
        fp_count = int(neg["signal"].sum())
        tp_count = int(pos["signal"].sum())
        fp = fp_count / n if n else math.nan
        tp = tp_count / p if p else math.nan
        acc = (tp_count + (n - fp_count)) / (p + n)
        defined = n > 0 and p > 0
        auc = (tp + 1.0 - fp) / 2.0 if defined else math.nan
        out.append(dict(zip(keys, key)) | {
            "FP": fp_count, "N": n, "TP": tp_count, "P": p,
            "fp": fp, "tp": tp, "accuracy": acc,
            "auc": auc, "auc_defined": defined,
        })
    return pd.DataFrame(out)


def rank(summaries: pd.DataFrame, by: str = "auc") -> pd.DataFrame:
    """Stable descending sort by `by`; ties go to the smaller significance,
    then to combination name."""
    if by not in ("auc", "accuracy"):
        raise ValueError("by must be 'auc' or 'accuracy'")
    if summaries.empty:
        raise ValueError("nothing to rank")
    return summaries.sort_values(
        [by, "significance", "combination"],
        ascending=[False, True, True],
        kind="mergesort",
    ).reset_index(drop=True)


@dataclass(frozen=True)
class PowerEstimate:
    background_rate: float
    adr_rate_rel: float
    n_obs: int
    power: float
    mc_se: float
    n_events_mean: float


def estimate_power(outcomes: pd.DataFrame, background_rate, adr_rate_rel, n_obs,
                   combination=None, significance=None) -> PowerEstimate:
    """Signal fraction among one scenario's replicates, with Monte Carlo SE."""
    if adr_rate_rel <= 0.0:
        raise ValueError("power is defined only for scenarios with an ADR component")
    sel = (
        (outcomes["background_rate"] == background_rate)
        & (outcomes["adr_rate_rel"] == adr_rate_rel)
        & (outcomes["n_obs"] == n_obs)
    )
    if combination is not None:
        sel &= outcomes["combination"] == combination
    if significance is not None:
        sel &= outcomes["significance"] == significance
    grp = outcomes[sel]
    if grp.empty:
        raise ValueError("no outcome rows match the scenario key")
    p = len(grp)
    power = float(grp["signal"].mean())
    return PowerEstimate(
        background_rate=background_rate,
        adr_rate_rel=adr_rate_rel,
        n_obs=n_obs,
        power=power,
        mc_se=math.sqrt(power * (1.0 - power) / p),
        n_events_mean=float(grp["n_events"].mean()),
    )


@dataclass(frozen=True)
class SampleSizeResult:
    target_power: float
    n_required: int | None  # None when even max(n_grid) misses the target
    exceeds_grid: bool
    power: float | None
    mc_se: float | None
    n_events_mean: float | None


def _power_at(templates, spec: TestSpec, n: int, threads: int):
    scenarios = [dataclasses.replace(t, n_obs=n) for t in templates]
    rows = run_grid(scenarios, [spec], threads=threads)
    signals = np.array([r.signal for r in rows], dtype=float)
    events = np.array([r.n_events for r in rows], dtype=float)
    power = float(signals.mean())
    se = math.sqrt(power * (1.0 - power) / signals.size)
    return power, se, float(events.mean())


def sample_size_search(target_power, template, spec: TestSpec, n_grid,
                       granularity: int = 50, threads: int = 1) -> SampleSizeResult:
    """Smallest n on (and then bisected between) the grid whose simulated power
    reaches the target.

    `template` is a Scenario (or list of Scenarios, e.g. one per ADR-time
    spread, pooled) whose n_obs is overridden at each probe.
    """
    if not 0.0 < target_power < 1.0:
        raise ValueError("target_power must be in (0, 1)")
    n_grid = sorted(int(n) for n in n_grid)
    if not n_grid:
        raise ValueError("n_grid must be nonempty")
    templates = [template] if isinstance(template, Scenario) else list(template)
    if any(t.adr_rate_rel <= 0.0 for t in templates):
        raise ValueError("sample-size search needs an ADR component")

    prev_power = None
    bracket_lo = None
    hit = None
    for n in n_grid:
        power, se, ev = _power_at(templates, spec, n, threads)
        if prev_power is not None and power < prev_power - 2.0 * se:
            warnings.warn(
                f"estimated power decreased from {prev_power:.3f} to {power:.3f} "
                f"at n={n}; Monte Carlo noise larger than expected"
            )
        prev_power = power
        if power >= target_power:
            hit = (n, power, se, ev)
            break
        bracket_lo = n
    if hit is None:
        return SampleSizeResult(target_power, None, True, prev_power, None, None)
    n_hi, power, se, ev = hit
    if bracket_lo is None:  # every grid point passes
        return SampleSizeResult(target_power, n_hi, False, power, se, ev)
    lo, hi = bracket_lo, n_hi
    while hi - lo > granularity:
        mid = int(round((lo + hi) / 2.0 / granularity) * granularity)
        if mid <= lo or mid >= hi:
            break
        p_mid, se_mid, ev_mid = _power_at(templates, spec, mid, threads)
        if p_mid >= target_power:
            hi, power, se, ev = mid, p_mid, se_mid, ev_mid
        else:
            lo = mid
    return SampleSizeResult(target_power, hi, False, power, se, ev)
