"""Unit tests for cohort generation and the simulation engine."""

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from wspsignal import Scenario, default_grid, default_specs, generate_cohort, run_grid, write_outcomes
from wspsignal.detect import TestSpec
from wspsignal.simulate import OUTCOME_COLUMNS


def _scenario(**overrides):
    base = dict(
        n_obs=2000,
        background_rate=0.05,
        adr_rate_rel=1.0,
        adr_sd_rel=3.7 / 365.0,
        replications=50,
        master_seed=123,
    )
    base.update(overrides)
    return Scenario(**base)


class TestScenarioValidation:
    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            _scenario(n_obs=0)
        with pytest.raises(ValueError):
            _scenario(background_rate=0.0)
        with pytest.raises(ValueError):
            _scenario(adr_rate_rel=-0.5)
        with pytest.raises(ValueError):
            _scenario(adr_sd_rel=0.0)

    def test_rejects_expected_events_over_n(self):
        with pytest.raises(ValueError):
            _scenario(background_rate=0.6, adr_rate_rel=1.0)

    def test_derived_fields(self):
        sc = _scenario()
        assert sc.adr_sd_days == pytest.approx(3.7)
        assert sc.scenario_id == "n2000_bg0.05_adr1_sd3.7"


class TestGenerateCohort:
    def test_deterministic(self):
        sc = _scenario()
        a = generate_cohort(sc, 7)
        b = generate_cohort(sc, 7)
        np.testing.assert_array_equal(a.sample.times, b.sample.times)
        np.testing.assert_array_equal(a.sample.events, b.sample.events)
        assert a.truth == b.truth

    def test_reps_differ(self):
        sc = _scenario()
        a = generate_cohort(sc, 0)
        b = generate_cohort(sc, 1)
        assert not np.array_equal(a.sample.times, b.sample.times)

    def test_rep_out_of_range(self):
        with pytest.raises(ValueError):
            generate_cohort(_scenario(replications=5), 5)

    def test_event_count_moments(self):
        sc = _scenario(replications=300)
        bg = np.array([generate_cohort(sc, r).truth.n_background_events for r in range(300)])
        adr = np.array([generate_cohort(sc, r).truth.n_adr_events for r in range(300)])
        n, p = sc.n_obs, sc.background_rate
        se = np.sqrt(n * p * (1 - p) / 300)
        assert abs(bg.mean() - n * p) < 3 * se
        assert abs(adr.mean() - n * p * sc.adr_rate_rel) < 3 * se

    def test_null_scenario_truth(self):
        c = generate_cohort(_scenario(adr_rate_rel=0.0), 0)
        assert not c.truth.has_adr_component
        assert c.truth.adr_mean_day is None
        assert c.truth.n_adr_events == 0

    def test_background_times_match_constant_hazard(self):
        sc = _scenario(adr_rate_rel=0.0, n_obs=20000, replications=5)
        lam = -np.log1p(-sc.background_rate) / sc.window_end
        pooled = np.concatenate(
            [
                generate_cohort(sc, r).sample.times[generate_cohort(sc, r).sample.events]
                for r in range(5)
            ]
        )
        # truncated-exponential CDF on the window
        cdf = lambda t: -np.expm1(-lam * t) / sc.background_rate
        assert stats.kstest(pooled, cdf).pvalue > 0.001

    def test_adr_times_are_integer_days_in_window(self):
        sc = _scenario(n_obs=5000)
        c = generate_cohort(sc, 3)
        adr = c.sample.times[c.truth.n_background_events : c.truth.n_background_events + c.truth.n_adr_events]
        assert adr.size == c.truth.n_adr_events > 0
        assert np.all(adr == np.rint(adr))
        assert adr.min() >= 1.0 and adr.max() <= 365.0

    def test_adr_times_center_on_drawn_mean(self):
        sc = _scenario(n_obs=20000, adr_sd_rel=18.3 / 365.0, replications=200)
        for r in range(200):
            c = generate_cohort(sc, r)
            mean = c.truth.adr_mean_day
            if not 2 * sc.adr_sd_days < mean < 365.0 - 2 * sc.adr_sd_days:
                continue
            i = c.truth.n_background_events
            adr = c.sample.times[i : i + c.truth.n_adr_events]
            assert abs(adr.mean() - mean) < 3.0 * sc.adr_sd_days / np.sqrt(adr.size) + 0.5

    def test_censored_subjects_end_at_window(self):
        c = generate_cohort(_scenario(), 0)
        assert np.all(c.sample.times[~c.sample.events] == 365.0)


class TestRunGrid:
    def test_cardinality(self):
        grid = [_scenario(replications=2), _scenario(background_rate=0.02, replications=2)]
        specs = [TestSpec("WSP", 0.01), TestSpec("dWSP", 0.01), TestSpec("dWSP", 0.05)]
        rows = run_grid(grid, specs)
        assert len(rows) == 2 * 2 * 3

    def test_embedded_component_consistency(self):
        grid = [_scenario(n_obs=3000, replications=6)]
        specs = [TestSpec("WSP", 0.01), TestSpec("dWSP-pWSP", 0.01)]
        rows = run_grid(grid, specs)
        by_key = {(r.rep, r.combination): r for r in rows}
        for rep in range(6):
            wsp = by_key[(rep, "WSP")]
            full = by_key[(rep, "dWSP-pWSP")]
            assert wsp.p_alpha1 == full.p_alpha1
            expected = wsp.status_wsp == "converged" and wsp.p_alpha1 < 0.01
            assert wsp.signal == expected

    def test_thread_count_does_not_change_rows(self):
        grid = [_scenario(n_obs=1000, replications=8)]
        specs = [TestSpec("dWSP-pWSP", 0.05)]
        serial = run_grid(grid, specs, threads=1)
        parallel = run_grid(grid, specs, threads=2)
        assert [(r.rep, r.signal, r.p_alpha1, r.n_events) for r in serial] == [
            (r.rep, r.signal, r.p_alpha1, r.n_events) for r in parallel
        ]

    def test_rejects_empty_inputs(self):
        with pytest.raises(ValueError):
            run_grid([], [TestSpec("WSP", 0.05)])
        with pytest.raises(ValueError):
            run_grid([_scenario()], [])


class TestOutputs:
    def test_write_outcomes_schema(self, tmp_path):
        rows = run_grid([_scenario(n_obs=500, replications=3)], [TestSpec("dWSP-pWSP", 0.05)])
        path = tmp_path / "out.csv"
        write_outcomes(rows, path)
        frame = pd.read_csv(path)
        assert tuple(frame.columns) == OUTCOME_COLUMNS
        assert len(frame) == 3
        assert set(frame["combination"]) == {"dWSP-pWSP"}
        assert frame["signal"].isin([0, 1]).all()

    def test_default_grid_and_specs_sizes(self):
        grid = default_grid(replications=10)
        assert len(grid) == 4 * 3 * 5 * 2
        specs = default_specs()
        assert len(specs) == 6 * 10
