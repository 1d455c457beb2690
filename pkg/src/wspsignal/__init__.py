"""Shape-parameter signal detection for adverse drug reactions from
time-to-event data: Weibull/PGW models, the WSP family of tests, and the
Monte Carlo machinery to calibrate significance levels and sample sizes.
"""

from .models import (
    PgwParams,
    SurvivalSample,
    WeibullParams,
    censored_loglik_pgw,
    censored_loglik_weibull,
    pgw_cumhaz,
    pgw_hazard,
    pgw_survival,
    sample_weibull,
    weibull_cumhaz,
    weibull_hazard,
    weibull_survival,
)
from .fit import FitResult, WaldInterval, fit_pgw, fit_weibull, shape_pvalue, wald_interval
from .detect import (
    COMBINATIONS,
    ComponentResult,
    TestOutcome,
    TestSpec,
    censor_at,
    run_combination,
    run_cwsp,
    run_pwsp,
    run_wsp,
)
from .simulate import (
    GeneratedCohort,
    OutcomeRow,
    Scenario,
    default_grid,
    default_specs,
    generate_cohort,
    run_grid,
    write_outcomes,
)
from .evaluate import (
    PowerEstimate,
    SampleSizeResult,
    estimate_power,
    rank,
    rows_to_frame,
    sample_size_search,
    summarize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
