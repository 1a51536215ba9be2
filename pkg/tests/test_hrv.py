from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from artutor.input_layer.hrv import (
    BaselineEstimator,
    HrvMetrics,
    RrWindow,
    StressClassifier,
    analyze_hrv,
    rmssd,
)

from .oracles import direct_rmssd


class TestAnalyzeHrv:
    def test_constant_series(self):
        metrics = analyze_hrv([800.0] * 8)
        assert metrics.rmssd_ms == 0.0
        assert metrics.mean_rr_ms == 800.0
        assert metrics.sample_count == 8

    def test_alternating_series_closed_form(self):
        metrics = analyze_hrv([800.0, 810.0, 800.0, 810.0, 800.0])
        assert abs(metrics.rmssd_ms - 10.0) < 1e-12
        assert abs(metrics.mean_rr_ms - 804.0) < 1e-12

    def test_below_minimum_count_returns_none(self):
        assert analyze_hrv([800.0, 810.0, 820.0]) is None
        assert analyze_hrv([]) is None

    def test_matches_direct_formula_on_seeded_windows(self):
        rng = random.Random(20260823)
        for _ in range(100):
            n = rng.randrange(4, 64)
            intervals = [rng.uniform(500.0, 1200.0) for _ in range(n)]
            assert abs(rmssd(intervals) - direct_rmssd(intervals)) < 1e-9

    def test_sixty_interval_seeded_window(self):
        rng = random.Random(42)
        intervals = [800.0 + rng.gauss(0, 25) for _ in range(60)]
        assert abs(rmssd(intervals) - direct_rmssd(intervals)) < 1e-9

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(min_value=300, max_value=2000, allow_nan=False), min_size=4, max_size=40),
        st.floats(min_value=-100, max_value=100, allow_nan=False),
    )
    def test_shift_invariance(self, intervals, shift):
        shifted = [rr + shift for rr in intervals]
        assert abs(rmssd(intervals) - rmssd(shifted)) < 1e-9


class TestRrWindow:
    def test_out_of_range_discarded_with_counter(self):
        window = RrWindow(30_000)
        window.push(1000, [800.0, 100.0, 5000.0, 810.0])
        assert window.discarded_out_of_range == 2
        window.push(2000, [805.0, 795.0])
        metrics = window.metrics(2000)
        assert metrics.sample_count == 4

    def test_old_samples_slide_out(self):
        window = RrWindow(10_000)
        window.push(1000, [800.0] * 4)
        window.push(20_000, [900.0] * 4)
        metrics = window.metrics(20_000)
        assert metrics.mean_rr_ms == 900.0


def metrics_with(rmssd_ms: float) -> HrvMetrics:
    return HrvMetrics(window_ms=30_000, mean_rr_ms=800.0, rmssd_ms=rmssd_ms, sample_count=30)


class TestStressClassifier:
    def test_equal_to_baseline_stays_calm_no_event(self):
        clf = StressClassifier()
        baseline = metrics_with(40.0)
        for t in range(0, 60_000, 5_000):
            assert clf.classify(t, metrics_with(40.0), baseline) is None
        assert clf.level == "calm"

    def test_sustained_drop_emits_single_elevated_event(self):
        clf = StressClassifier()
        baseline = metrics_with(40.0)
        events = []
        for t in range(0, 13_000, 1_000):
            ev = clf.classify(t, metrics_with(28.0), baseline)
            if ev is not None:
                events.append(ev)
        assert len(events) == 1
        assert events[0].attributes["level"] == "elevated"
        assert events[0].t_ms == 10_000
        # Continued low values do not re-emit.
        assert clf.classify(20_000, metrics_with(28.0), baseline) is None

    def test_oscillation_around_baseline_emits_nothing(self):
        clf = StressClassifier()
        baseline = metrics_with(40.0)
        value = 39.0
        for t in range(0, 120_000, 5_000):
            assert clf.classify(t, metrics_with(value), baseline) is None
            value = 80.0 - value  # 39 <-> 41
        assert clf.level == "calm"

    def test_recovery_emits_calm_event(self):
        clf = StressClassifier()
        baseline = metrics_with(40.0)
        for t in range(0, 11_000, 1_000):
            clf.classify(t, metrics_with(28.0), baseline)
        assert clf.level == "elevated"
        ev = clf.classify(20_000, metrics_with(40.0), baseline)
        assert ev is not None and ev.attributes["level"] == "calm"

    def test_hysteresis_band_retains_elevated(self):
        clf = StressClassifier()
        baseline = metrics_with(40.0)
        for t in range(0, 11_000, 1_000):
            clf.classify(t, metrics_with(28.0), baseline)
        # 35 ms is above the 80% drop line but below 95% recovery.
        assert clf.classify(20_000, metrics_with(35.0), baseline) is None
        assert clf.level == "elevated"

    def test_events_pass_semantic_event_schema(self):
        clf = StressClassifier()
        baseline = metrics_with(40.0)
        for t in range(0, 11_000, 1_000):
            ev = clf.classify(t, metrics_with(28.0), baseline)
            if ev is not None:
                assert ev.validate().ok


class TestBaselineEstimator:
    def test_median_over_capture_period(self):
        est = BaselineEstimator(capture_ms=60_000)
        for t, value in [(30_000, 38.0), (35_000, 40.0), (40_000, 44.0)]:
            est.observe(t, metrics_with(value))
        assert est.baseline(59_000) is None
        baseline = est.baseline(61_000)
        assert baseline.rmssd_ms == 40.0

    def test_observations_after_capture_ignored(self):
        est = BaselineEstimator(capture_ms=60_000)
        est.observe(30_000, metrics_with(40.0))
        baseline = est.baseline(61_000)
        est.observe(70_000, metrics_with(10.0))
        assert est.baseline(80_000).rmssd_ms == baseline.rmssd_ms == 40.0
