"""Heart-rate-variability metrics and stress level classification."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from ..protocol import SemanticEvent

# Physiologically plausible inter-beat interval band; samples outside are
# discarded at ingestion with a counter, never an error.
RR_MIN_MS = 200.0
RR_MAX_MS = 3000.0

MIN_INTERVALS = 4


@dataclass(frozen=True)
class HrvMetrics:
    window_ms: int
    mean_rr_ms: float
    rmssd_ms: float
    sample_count: int


def rmssd(intervals: Sequence[float]) -> float:
    """Root mean square of successive differences between RR intervals."""
    diffs = [b - a for a, b in zip(intervals, intervals[1:])]
    return math.sqrt(sum(d * d for d in diffs) / len(diffs))


def analyze_hrv(rr_window: Sequence[float], window_ms: int = 30_000) -> Optional[HrvMetrics]:
    """Compute window metrics; None when fewer than 4 intervals are available."""
    if len(rr_window) < MIN_INTERVALS:
        return None
    return HrvMetrics(
        window_ms=window_ms,
        mean_rr_ms=sum(rr_window) / len(rr_window),
        rmssd_ms=rmssd(rr_window),
        sample_count=len(rr_window),
    )


class RrWindow:
    """Sliding window of RR intervals tagged with their arrival time."""

    def __init__(self, window_ms: int = 30_000):
        self.window_ms = window_ms
        self._samples: list[tuple[int, float]] = []
        self.discarded_out_of_range = 0

    def push(self, t_ms: int, intervals: Sequence[float]) -> None:
        for rr in intervals:
            if not (RR_MIN_MS < rr < RR_MAX_MS):
                self.discarded_out_of_range += 1
                continue
            self._samples.append((t_ms, rr))

    def metrics(self, now_ms: int) -> Optional[HrvMetrics]:
        cutoff = now_ms - self.window_ms
        self._samples = [(t, rr) for t, rr in self._samples if t > cutoff]
        return analyze_hrv([rr for _, rr in self._samples], self.window_ms)

    def reset(self) -> None:
        self._samples = []


class StressClassifier:
    """Hysteresis classifier over successive HRV windows.

    Elevated requires the current RMSSD to stay at or below 80% of baseline
    for a sustained period; calm requires recovery to at least 95% of
    baseline. Values in between retain the previous level. An event is
    emitted only when the level changes.
    """

    def __init__(
        self,
        drop_fraction: float = 0.2,
        recovery_fraction: float = 0.95,
        sustain_ms: int = 10_000,
    ):
        self.drop_fraction = drop_fraction
        self.recovery_fraction = recovery_fraction
        self.sustain_ms = sustain_ms
        self.level = "calm"
        self._low_since: Optional[int] = None

    def classify(
        self, t_ms: int, current: HrvMetrics, baseline: HrvMetrics
    ) -> Optional[SemanticEvent]:
        low = current.rmssd_ms <= (1.0 - self.drop_fraction) * baseline.rmssd_ms
        recovered = current.rmssd_ms >= self.recovery_fraction * baseline.rmssd_ms

        new_level = self.level
        if low:
            if self._low_since is None:
                self._low_since = t_ms
            if t_ms - self._low_since >= self.sustain_ms:
                new_level = "elevated"
        else:
            self._low_since = None
            if recovered:
                new_level = "calm"

        if new_level == self.level:
            return None
        self.level = new_level
        return SemanticEvent(
            event_id=f"stress@{t_ms}",
            kind="stress_level_changed",
            source="physiological_analyzer",
            t_ms=t_ms,
            confidence=1.0,
            attributes={
                "level": new_level,
                "rmssd_ms": round(current.rmssd_ms, 3),
                "baseline_rmssd_ms": round(baseline.rmssd_ms, 3),
            },
        )

    def reset(self) -> None:
        self.level = "calm"
        self._low_since = None


class BaselineEstimator:
    """Median RMSSD over windows observed during the initial capture period."""

    def __init__(self, capture_ms: int = 60_000):
        self.capture_ms = capture_ms
        self._rmssd_values: list[float] = []
        self._baseline: Optional[HrvMetrics] = None

    def observe(self, t_ms: int, metrics: HrvMetrics) -> None:
        if self._baseline is None and t_ms <= self.capture_ms:
            self._rmssd_values.append(metrics.rmssd_ms)

    def baseline(self, now_ms: int) -> Optional[HrvMetrics]:
        if self._baseline is None and now_ms > self.capture_ms and self._rmssd_values:
            self._baseline = HrvMetrics(
                window_ms=self.capture_ms,
                mean_rr_ms=0.0,
                rmssd_ms=statistics.median(self._rmssd_values),
                sample_count=len(self._rmssd_values),
            )
        return self._baseline

    def reset(self) -> None:
        self._rmssd_values = []
        self._baseline = None
