"""Weibull and power generalized Weibull (PGW) event-time models.

Both models are parameterized so that a constant hazard is a single
point in parameter space: Weibull shape = 1, or PGW nu = gamma = 1.
The Weibull scale is rate-like (survival exp(-(scale*t)**shape)); the
PGW scale is time-like (survival exp(1 - (1 + (t/scale)**nu)**(1/gamma))).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Clamp for intermediate powers so likelihood evaluations at extreme
# parameters stay finite during optimization.
_LOG_LO = np.log(1e-300)
_LOG_HI = np.log(1e300)
_CUMHAZ_CAP = 1e250


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite real, got {value!r}")


@dataclass(frozen=True)
class WeibullParams:
    """Weibull hazard shape*scale**shape * t**(shape-1); shape=1 gives constant hazard = scale."""

    shape: float
    scale: float

    def __post_init__(self):
        _positive("shape", self.shape)
        _positive("scale", self.scale)


@dataclass(frozen=True)
class PgwParams:
    """PGW hazard (nu/(gamma*scale**nu)) t**(nu-1) (1+(t/scale)**nu)**(1/gamma - 1).

    nu = gamma = 1 gives constant hazard = 1/scale (exponential).
    """

    nu: float
    gamma: float
    scale: float

    def __post_init__(self):
        _positive("nu", self.nu)
        _positive("gamma", self.gamma)
        _positive("scale", self.scale)


@dataclass(frozen=True)
class SurvivalSample:
    """Right-censored event-time cohort over a fixed observation window.

    times are in days, 0 < t <= window_end; events marks which
    observations are events (True) vs censored (False).
    """

    times: np.ndarray
    events: np.ndarray
    window_end: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        events = np.asarray(self.events, dtype=bool)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events)
        if times.shape != events.shape or times.ndim != 1:
            raise ValueError("times and events must be 1-d arrays of equal length")
        if not (np.isfinite(self.window_end) and self.window_end > 0):
            raise ValueError("window_end must be a positive real")
        if times.size and (times.min() <= 0 or times.max() > self.window_end):
            raise ValueError("every time must satisfy 0 < t <= window_end")

    @classmethod
    def from_records(cls, records, window_end):
        """Build from an iterable of (time, status) pairs; status 1=event, 0=censored."""
        recs = list(records)
        times = np.array([t for t, _ in recs], dtype=float)
        events = np.array([bool(s) for _, s in recs], dtype=bool)
        return cls(times, events, window_end)

    @property
    def n_events(self) -> int:
        return int(self.events.sum())

    def __len__(self) -> int:
        return self.times.size


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be strictly positive")
    return t


def weibull_hazard(p: WeibullParams, t):
    t = _check_times(t)
    log_h = np.log(p.shape) + p.shape * np.log(p.scale) + (p.shape - 1.0) * np.log(t)
    return np.exp(np.clip(log_h, _LOG_LO, _LOG_HI))


def weibull_cumhaz(p: WeibullParams, t):
    t = _check_times(t)
    log_ch = p.shape * (np.log(p.scale) + np.log(t))
    return np.minimum(np.exp(np.clip(log_ch, _LOG_LO, _LOG_HI)), _CUMHAZ_CAP)


def weibull_survival(p: WeibullParams, t):
    return np.exp(-weibull_cumhaz(p, t))


def pgw_hazard(p: PgwParams, t):
    t = _check_times(t)
    log_u = np.clip(p.nu * (np.log(t) - np.log(p.scale)), _LOG_LO, _LOG_HI)
    log_w = np.log1p(np.exp(log_u))
    log_h = (
        np.log(p.nu)
        - np.log(p.gamma)
        - p.nu * np.log(p.scale)
        + (p.nu - 1.0) * np.log(t)
        + (1.0 / p.gamma - 1.0) * log_w
    )
    return np.exp(np.clip(log_h, _LOG_LO, _LOG_HI))


def pgw_cumhaz(p: PgwParams, t):
    t = _check_times(t)
    log_u = np.clip(p.nu * (np.log(t) - np.log(p.scale)), _LOG_LO, _LOG_HI)
    log_w = np.log1p(np.exp(log_u))
    return np.minimum(np.expm1(np.clip(log_w / p.gamma, _LOG_LO, _LOG_HI)), _CUMHAZ_CAP)


def pgw_survival(p: PgwParams, t):
    return np.exp(-pgw_cumhaz(p, t))


def censored_loglik_weibull(p: WeibullParams, s: SurvivalSample) -> float:
    """Right-censored log-likelihood: sum of event log-hazards minus all cumulative hazards."""
    if len(s) == 0:
        raise ValueError("sample is empty")
    ll = -weibull_cumhaz(p, s.times).sum()
    if s.n_events:
        te = s.times[s.events]
        ll += (np.log(p.shape) + p.shape * np.log(p.scale)) * te.size
        ll += (p.shape - 1.0) * np.log(te).sum()
    return float(ll)


def censored_loglik_pgw(p: PgwParams, s: SurvivalSample) -> float:
    if len(s) == 0:
        raise ValueError("sample is empty")
    ll = -pgw_cumhaz(p, s.times).sum()
    if s.n_events:
        ll += np.log(pgw_hazard(p, s.times[s.events])).sum()
    return float(ll)


def sample_weibull(p: WeibullParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws; empirical survival converges to exp(-(scale*t)**shape)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    u = rng.random(n)
    return (-np.log1p(-u)) ** (1.0 / p.shape) / p.scale
