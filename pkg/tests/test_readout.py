import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atomreadout.detection import poisson_trace
from atomreadout.physics import F1, F2, depump_hazard_per_scatter, depump_suppression
from atomreadout.readout import (
    ADAPTIVE_STOP,
    FIXED_WINDOW,
    ProbeEvent,
    ReadoutPolicy,
    analytic_f1_error,
    analytic_f2_error,
    calibrate_depump,
    classify_fixed,
    detection_events,
    implied_effective_detuning,
    run_adaptive,
)
from helpers import markov_f2_error

ADAPTIVE = ReadoutPolicy(ADAPTIVE_STOP, 2, 300e-6)
FIXED = ReadoutPolicy(FIXED_WINDOW, 2, 300e-6)

HAZARD_GRID = [
    (eta, q, nd)
    for eta in (0.01, 0.02, 0.05)
    for q in (1e-4, 6e-4, 2e-3)
    for nd in (1, 2, 3)
]


class TestPolicy:
    def test_threshold_at_least_one(self):
        with pytest.raises(ValueError):
            ReadoutPolicy(ADAPTIVE_STOP, 0, 1e-3)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            ReadoutPolicy("mystery", 2, 1e-3)


class TestClassifyFixed:
    def test_zero_counts_is_dark(self):
        assert classify_fixed(0, FIXED) == F1

    def test_boundary_inclusive(self):
        assert classify_fixed(2, FIXED) == F2

    def test_typical_bright_signal(self):
        assert classify_fixed(21, FIXED) == F2

    def test_wrong_policy_kind_rejected(self):
        with pytest.raises(ValueError):
            classify_fixed(2, ADAPTIVE)


class TestRunAdaptive:
    def test_empty_source(self):
        outcome = run_adaptive((), ADAPTIVE)
        assert outcome.classified == F1
        assert outcome.detected_counts == 0
        assert outcome.elapsed == ADAPTIVE.max_duration

    def test_stops_at_second_count(self):
        outcome = run_adaptive(detection_events([10e-6, 40e-6, 200e-6]), ADAPTIVE)
        assert outcome.classified == F2
        assert outcome.detected_counts == 2
        assert outcome.elapsed == pytest.approx(40e-6)

    def test_wrong_policy_kind_rejected(self):
        with pytest.raises(ValueError):
            run_adaptive((), FIXED)

    def test_consumes_lazily_from_generator(self):
        seen = []

        def source():
            for t in (1e-6, 2e-6, 3e-6, 4e-6):
                seen.append(t)
                yield ProbeEvent(time=t)

        run_adaptive(source(), ADAPTIVE)
        assert seen == [1e-6, 2e-6]

    def test_scatter_and_depump_tally(self):
        events = (
            ProbeEvent(5e-6, detected=False, scatter=True),
            ProbeEvent(8e-6, detected=False, scatter=True, depump=True),
            ProbeEvent(20e-6, detected=True),
        )
        outcome = run_adaptive(events, ReadoutPolicy(ADAPTIVE_STOP, 1, 300e-6))
        assert outcome.scatters == 2
        assert outcome.depumped_during_probe
        assert outcome.classified == F2

    def test_mean_stop_time_is_second_arrival(self):
        # signal mean 21 per 300 us -> detection rate 70 kHz, Erlang-2 mean 28.6 us
        rng = np.random.default_rng(7)
        trials = 100_000
        elapsed = np.empty(trials)
        for i in range(trials):
            trace = poisson_trace(70_000.0, 300e-6, rng)
            elapsed[i] = run_adaptive(detection_events(trace.event_times), ADAPTIVE).elapsed
        assert abs(elapsed.mean() - 2.0 / 70_000.0) / (2.0 / 70_000.0) < 0.05

    def test_agrees_with_fixed_window_when_threshold_reached(self):
        # the adaptive rule can stop early but never change the decision
        rng = np.random.default_rng(13)
        for _ in range(10_000):
            trace = poisson_trace(rng.uniform(1e3, 3e4), 300e-6, rng)
            adaptive = run_adaptive(detection_events(trace.event_times), ADAPTIVE)
            fixed = classify_fixed(trace.count, FIXED)
            if trace.count >= FIXED.threshold_counts:
                assert adaptive.classified == fixed == F2
            else:
                assert adaptive.classified == fixed == F1


class TestAnalyticF1Error:
    def test_reference_background(self):
        assert analytic_f1_error(ADAPTIVE, 0.3) == pytest.approx(
            3.693631311376678e-2, rel=1e-12
        )

    def test_zero_background(self):
        assert analytic_f1_error(ADAPTIVE, 0.0) == 0.0

    def test_single_count_threshold(self):
        policy = ReadoutPolicy(ADAPTIVE_STOP, 1, 300e-6)
        assert analytic_f1_error(policy, 0.3) == pytest.approx(0.2591817793182821, rel=1e-12)


class TestAnalyticF2Error:
    def test_zero_hazard(self):
        assert analytic_f2_error(0.02, 0.0, 2) == 0.0

    def test_calibrated_operating_point(self):
        q = calibrate_depump(0.055, 0.02, 2)
        assert analytic_f2_error(0.02, q, 2) == pytest.approx(0.055, rel=1e-12)

    def test_unshifted_resonance_operating_point(self):
        q = depump_hazard_per_scatter(depump_suppression(0.0), 0.5)
        assert analytic_f2_error(0.02, q, 2) == pytest.approx(6.203672779227e-3, rel=1e-9)

    @pytest.mark.parametrize("eta,q,nd", HAZARD_GRID)
    def test_matches_markov_chain_oracle(self, eta, q, nd):
        assert analytic_f2_error(eta, q, nd) == pytest.approx(
            markov_f2_error(eta, q, nd), abs=1e-9
        )

    def test_strictly_increasing_in_hazard(self):
        errs = [analytic_f2_error(0.02, q, 2) for q in (1e-5, 1e-4, 1e-3, 1e-2)]
        assert all(a < b for a, b in zip(errs, errs[1:]))

    def test_strictly_increasing_in_threshold(self):
        errs = [analytic_f2_error(0.02, 6e-4, nd) for nd in (1, 2, 3, 5)]
        assert all(a < b for a, b in zip(errs, errs[1:]))

    def test_strictly_decreasing_in_efficiency(self):
        errs = [analytic_f2_error(eta, 6e-4, 2) for eta in (0.01, 0.02, 0.05, 0.2)]
        assert all(a > b for a, b in zip(errs, errs[1:]))


class TestCalibrateDepump:
    def test_reference_calibration(self):
        assert calibrate_depump(0.055, 0.02, 2) == pytest.approx(5.854897907608052e-4, rel=1e-12)

    def test_zero_target(self):
        assert calibrate_depump(0.0, 0.02, 2) == 0.0

    def test_matches_bisection_oracle(self):
        target, eta, nd = 0.055, 0.02, 2
        lo, hi = 0.0, 0.5
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if analytic_f2_error(eta, mid, nd) < target:
                lo = mid
            else:
                hi = mid
        assert calibrate_depump(target, eta, nd) == pytest.approx(0.5 * (lo + hi), rel=1e-10)

    @given(st.floats(min_value=1e-8, max_value=0.1))
    @settings(max_examples=200)
    def test_round_trip_identity_on_hazards(self, hazard):
        error = analytic_f2_error(0.02, hazard, 2)
        assert calibrate_depump(error, 0.02, 2) == pytest.approx(hazard, rel=1e-10)

    def test_unreachable_target_rejected(self):
        with pytest.raises(ValueError):
            calibrate_depump(1.0 - 1e-12, 0.02, 2)

    def test_perfect_detector_rejected(self):
        with pytest.raises(ValueError):
            calibrate_depump(0.05, 1.0, 2)


class TestImpliedDetuning:
    def test_calibrated_hazard_implies_lightshifted_detuning(self):
        q = calibrate_depump(0.055, 0.02, 2)
        detuning = implied_effective_detuning(q, 0.5)
        assert detuning == pytest.approx(8.5938e6, rel=1e-3)
        # implied suppression sits near 854
        assert 0.5 / q == pytest.approx(853.99, rel=1e-3)

    def test_round_trips_through_suppression(self):
        q = 2.3e-4
        detuning = implied_effective_detuning(q, 0.5)
        assert depump_hazard_per_scatter(depump_suppression(detuning), 0.5) == pytest.approx(
            q, rel=1e-12
        )

    def test_hazard_below_resonant_floor_rejected(self):
        with pytest.raises(ValueError):
            implied_effective_detuning(1e-9, 0.5)
