"""Maximum-likelihood fitting of the Weibull and PGW models to censored samples.

Optimization runs in log-parameter space (positivity for free, Wald
intervals on the log scale) with analytic gradients; standard errors come
from the observed information, i.e. the negative numeric Hessian of the
log-likelihood at the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.stats import norm

from .models import SurvivalSample, _CUMHAZ_CAP, _LOG_HI, _LOG_LO

_GTOL = 1e-6
_MAX_ITER = 200
_EIG_TOL = 1e-10

WEIBULL_PARAM_NAMES = ("shape", "scale")
PGW_PARAM_NAMES = ("nu", "gamma", "scale")


@dataclass(frozen=True)
class FitResult:
    """One model fit: natural-scale estimates, log-scale SEs, convergence status."""

    model: str  # "weibull" or "pgw"
    estimates: np.ndarray | None
    log_se: np.ndarray | None
    loglik: float | None
    status: str  # "converged" or "not_estimable"
    iterations: int

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def param_names(self):
        return WEIBULL_PARAM_NAMES if self.model == "weibull" else PGW_PARAM_NAMES


def _not_estimable(model, iterations=0):
    return FitResult(model, None, None, None, "not_estimable", iterations)


def _compress(s: SurvivalSample):
    """Aggregate ties into (unique time, weight) arrays; big speedup on day-grid data."""
    if s.n_events == 0:
        raise ValueError("sample must contain at least one event")
    te, we = np.unique(s.times[s.events], return_counts=True)
    ta, wa = np.unique(s.times, return_counts=True)
    return te, we.astype(float), ta, wa.astype(float)


def _weibull_negloglik_grad(x, te, we, ta, wa):
    a, b = np.clip(x, -100.0, 100.0)  # log shape, log scale
    shape = np.exp(a)
    d = we.sum()
    log_ta = np.log(ta)
    log_c = np.clip(shape * (b + log_ta), _LOG_LO, _LOG_HI)
    c = np.minimum(np.exp(log_c), _CUMHAZ_CAP)
    wc = wa * c
    ll = d * (a + shape * b) + (shape - 1.0) * (we * np.log(te)).sum() - wc.sum()
    # gradient in log-parameters
    lzt_e = (we * (b + np.log(te))).sum()
    lzt_c = (wc * (b + log_ta)).sum()
    g_a = d + shape * lzt_e - shape * lzt_c
    g_b = shape * (d - wc.sum())
    if not np.isfinite(ll):
        ll = -1e12
    return -ll, -np.array([g_a, g_b])


def _pgw_negloglik_grad(x, te, we, ta, wa):
    # box the log-parameters so line-search probes far from the optimum
    # cannot overflow; no plausible optimum lives outside +-100
    a, b, c = np.clip(x, -100.0, 100.0)
    nu, gamma = np.exp(a), np.exp(b)
    d = we.sum()
    m_a = np.log(ta) - c  # log(t/theta)
    log_u = np.clip(nu * m_a, _LOG_LO, _LOG_HI)
    u = np.exp(log_u)
    w = 1.0 + u
    log_w = np.log1p(u)
    p_pow = np.minimum(np.exp(np.clip(log_w / gamma, _LOG_LO, _LOG_HI)), _CUMHAZ_CAP)
    r = u / w
    # event times are a subset of ta; map by searchsorted
    idx = np.searchsorted(ta, te)
    m_e, log_w_e, r_e = m_a[idx], log_w[idx], r[idx]

    ll = (
        d * (a - b - nu * c)
        + (nu - 1.0) * (we * np.log(te)).sum()
        + (1.0 / gamma - 1.0) * (we * log_w_e).sum()
        - (wa * (p_pow - 1.0)).sum()
    )
    wp = wa * p_pow
    g_nu = (
        (we * (1.0 / nu + m_e + (1.0 / gamma - 1.0) * r_e * m_e)).sum()
        - (wp * r * m_a).sum() / gamma
    )
    g_gamma = (we * (-1.0 / gamma - log_w_e / gamma**2)).sum() + (wp * log_w).sum() / gamma**2
    g_theta = (we * (1.0 + (1.0 / gamma - 1.0) * r_e)).sum() * (-nu) + (wp * r).sum() * nu / gamma
    grad = np.array([nu * g_nu, gamma * g_gamma, g_theta])
    if not np.isfinite(ll):
        ll = -1e12
    return -ll, -grad


def _hessian_from_grad(grad_fn, x, args, h=1e-5):
    k = x.size
    hess = np.empty((k, k))
    for i in range(k):
        step = np.zeros(k)
        step[i] = h
        _, gp = grad_fn(x + step, *args)
        _, gm = grad_fn(x - step, *args)
        hess[i] = (gp - gm) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def _newton_polish(fun, x, args, max_steps=20):
    """Finish off a quasi-Newton run whose line search stalled short of the
    gradient tolerance; near the optimum a few damped Newton steps suffice."""
    f0, g = fun(x, *args)
    for _ in range(max_steps):
        if not np.all(np.isfinite(g)) or np.max(np.abs(g)) < _GTOL:
            break
        hess = _hessian_from_grad(fun, x, args)
        try:
            dx = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        for _ in range(30):
            f1, g1 = fun(x + step * dx, *args)
            # near the optimum the objective decrease can fall below float
            # resolution; a shrinking gradient norm also counts as progress
            if f1 <= f0 or np.max(np.abs(g1)) < 0.9 * np.max(np.abs(g)):
                break
            step /= 2.0
        else:
            break
        x, f0, g = x + step * dx, f1, g1
    return x, f0, g


def _fit(model, fun, x0, args):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        res = optimize.minimize(
            fun, x0, args=args, jac=True, method="BFGS",
            options={"gtol": _GTOL, "maxiter": _MAX_ITER},
        )
        x, neg_ll, grad = _newton_polish(fun, res.x, args)
        if not np.isfinite(neg_ll) or np.max(np.abs(grad)) >= _GTOL:
            return _not_estimable(model, res.nit)
        # observed information = negative Hessian of loglik = Hessian of negloglik
        info = _hessian_from_grad(fun, x, args)
        if not np.all(np.isfinite(info)):
            return _not_estimable(model, res.nit)
        eigvals = np.linalg.eigvalsh(info)
        if eigvals.min() <= _EIG_TOL:
            return _not_estimable(model, res.nit)
        log_se = np.sqrt(np.diag(np.linalg.inv(info)))
        if not np.all(np.isfinite(log_se)):
            return _not_estimable(model, res.nit)
        return FitResult(model, np.exp(x), log_se, -neg_ll, "converged", res.nit)


def _exponential_rate(s: SurvivalSample) -> float:
    # null-model MLE: events / total follow-up
    return s.n_events / s.times.sum()


def fit_weibull(s: SurvivalSample) -> FitResult:
    """Fit the Weibull model; returns not_estimable instead of raising on numeric failure."""
    te, we, ta, wa = _compress(s)
    rate = _exponential_rate(s)
    x0 = np.array([0.0, np.log(rate)])
    return _fit("weibull", _weibull_negloglik_grad, x0, (te, we, ta, wa))


def fit_pgw(s: SurvivalSample) -> FitResult:
    """Fit the PGW model; scale is time-like, started at the exponential mean 1/rate."""
    te, we, ta, wa = _compress(s)
    rate = _exponential_rate(s)
    x0 = np.array([0.0, 0.0, -np.log(rate)])
    return _fit("pgw", _pgw_negloglik_grad, x0, (te, we, ta, wa))


def wald_interval(f: FitResult, param_index: int, level: float):
    """Confidence interval exp(log estimate +- z * log_se) at the given significance level."""
    if not f.converged:
        raise ValueError("wald_interval requires a converged fit")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    z = norm.ppf(1.0 - level / 2.0)
    log_pt = np.log(f.estimates[param_index])
    se = f.log_se[param_index]
    return WaldInterval(
        point=float(f.estimates[param_index]),
        lower=float(np.exp(log_pt - z * se)),
        upper=float(np.exp(log_pt + z * se)),
        level=level,
    )


@dataclass(frozen=True)
class WaldInterval:
    point: float
    lower: float
    upper: float
    level: float


def shape_pvalue(f: FitResult, param_index: int) -> float:
    """Two-sided Wald p-value for H0: parameter = 1, on the log scale.

    p < level exactly when the level Wald interval excludes 1.
    """
    if not f.converged:
        raise ValueError("shape_pvalue requires a converged fit")
    log_pt = np.log(f.estimates[param_index])
    if log_pt == 0.0:
        return 1.0
    z = abs(log_pt) / f.log_se[param_index]
    return max(float(2.0 * norm.sf(z)), 1e-300)
