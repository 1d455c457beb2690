"""Unit tests for the signal tests and their combinations."""

import numpy as np
import pytest

from wspsignal import (
    COMBINATIONS,
    ComponentResult,
    SurvivalSample,
    TestSpec,
    censor_at,
    run_combination,
    run_cwsp,
    run_pwsp,
    run_wsp,
)
from wspsignal.detect import decide, evaluate_components


def _spike_sample(rng, n=2000, bg_rate=0.05, mean=25.0, sd=4.0, window=365.0):
    """Constant-hazard background plus a tight early event cluster."""
    lam = -np.log1p(-bg_rate) / window
    n_bg = int(rng.binomial(n, bg_rate))
    n_adr = int(rng.binomial(n, bg_rate))
    bg = -np.log1p(-rng.random(n_bg) * bg_rate) / lam
    adr = np.clip(rng.normal(mean, sd, n_adr), 1.0, window - 1.0)
    times = np.concatenate([bg, adr, np.full(n - n_bg - n_adr, window)])
    events = np.zeros(n, dtype=bool)
    events[: n_bg + n_adr] = True
    return SurvivalSample(times, events, window)


class TestSpecValidation:
    def test_rejects_unknown_combination(self):
        with pytest.raises(ValueError):
            TestSpec("WSPX", 0.05)

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.2])
    def test_rejects_bad_significance(self, level):
        with pytest.raises(ValueError):
            TestSpec("WSP", level)


class TestCensorAt:
    def test_basic_censoring(self):
        s = SurvivalSample.from_records(
            [(10.0, 1), (182.5, 1), (200.0, 1), (365.0, 0)], 365.0
        )
        c = censor_at(s, 182.5)
        assert c.window_end == 182.5
        np.testing.assert_array_equal(c.times, [10.0, 182.5, 182.5, 182.5])
        # an event exactly at the cut is retained as an event
        np.testing.assert_array_equal(c.events, [True, True, False, False])

    def test_rejects_bad_cut(self):
        s = SurvivalSample.from_records([(10.0, 1)], 365.0)
        for cut in (0.0, 400.0, -5.0):
            with pytest.raises(ValueError):
                censor_at(s, cut)


class TestComponentResult:
    def test_not_estimable_never_signals(self):
        c = ComponentResult("wsp", (), "not_estimable")
        assert not c.signals_at(0.99)

    def test_pwsp_needs_both_parameters(self):
        c = ComponentResult("pwsp", (0.001, 0.2), "converged")
        assert not c.signals_at(0.05)
        assert c.signals_at(0.25)


class TestCombinationAlgebra:
    def _components(self, p_wsp, p_cwsp, p_nu, p_gamma):
        return {
            "wsp": ComponentResult("wsp", (p_wsp,), "converged"),
            "cwsp": ComponentResult("cwsp", (p_cwsp,), "converged"),
            "pwsp": ComponentResult("pwsp", (p_nu, p_gamma), "converged"),
        }

    def test_union_identities(self):
        comps = self._components(0.20, 0.002, 0.002, 0.002)
        level = 0.01
        wsp = decide(comps, TestSpec("WSP", level)).signal
        cwsp = decide(comps, TestSpec("cWSP", level)).signal
        pwsp = decide(comps, TestSpec("pWSP", level)).signal
        assert decide(comps, TestSpec("dWSP", level)).signal == (wsp or cwsp)
        assert decide(comps, TestSpec("WSP-pWSP", level)).signal == (wsp or pwsp)
        dwsp = decide(comps, TestSpec("dWSP", level)).signal
        assert decide(comps, TestSpec("dWSP-pWSP", level)).signal == (dwsp or pwsp)

    def test_monotone_in_significance(self):
        comps = self._components(0.03, 0.07, 0.02, 0.04)
        for name in COMBINATIONS:
            signals = [decide(comps, TestSpec(name, s)).signal for s in (0.01, 0.05, 0.10)]
            # once a combination signals it keeps signalling at larger levels
            assert signals == sorted(signals)


class TestOnData:
    def test_spike_sample_signals(self, rng):
        s = _spike_sample(rng)
        assert run_wsp(s, 0.01).signal
        assert run_cwsp(s, 0.01).signal
        assert run_combination(s, TestSpec("dWSP-pWSP", 0.01)).signal

    def test_null_sample_does_not_signal(self, exponential_sample):
        assert not run_combination(exponential_sample, TestSpec("dWSP-pWSP", 0.01)).signal

    def test_zero_event_sample(self):
        s = SurvivalSample(np.full(50, 365.0), np.zeros(50, dtype=bool), 365.0)
        out = run_combination(s, TestSpec("dWSP-pWSP", 0.05))
        assert not out.signal
        assert all(c.status == "not_estimable" for c in out.components)

    def test_cwsp_with_no_early_events(self):
        # every event falls after the mid-window cut, so cWSP has nothing to fit
        s = SurvivalSample.from_records(
            [(300.0, 1), (320.0, 1), (340.0, 1)] + [(365.0, 0)] * 50, 365.0
        )
        out = run_cwsp(s, 0.05)
        assert not out.signal
        assert out.components[0].status == "not_estimable"

    def test_decisions_derive_from_shared_components(self, rng):
        s = _spike_sample(rng, n=1000)
        comps = evaluate_components(s)
        for name in COMBINATIONS:
            for level in (0.01, 0.05):
                assert (
                    decide(comps, TestSpec(name, level)).signal
                    == run_combination(s, TestSpec(name, level)).signal
                )

    def test_pwsp_runs(self, rng):
        s = _spike_sample(rng, n=5000)
        out = run_pwsp(s, 0.05)
        assert out.components[0].name == "pwsp"
        assert out.components[0].status in ("converged", "not_estimable")
