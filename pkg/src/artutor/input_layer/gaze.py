"""Gaze fixation detection (dispersion-threshold) and AOI mapping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..protocol import SemanticEvent


class GazeInputError(ValueError):
    """Gaze samples out of time order or otherwise unusable."""


@dataclass(frozen=True)
class GazeSample:
    t_ms: int
    point_m: tuple[float, float, float]


@dataclass(frozen=True)
class Fixation:
    start_ms: int
    end_ms: int
    centroid_m: tuple[float, float, float]
    dispersion_m: float
    sample_count: int

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class FixationParams:
    dispersion_threshold_m: float = 0.03
    min_duration_ms: int = 150


def _dispersion(samples: Sequence[GazeSample], lo: int, hi: int) -> float:
    """Sum of per-axis coordinate ranges over samples[lo..hi] inclusive."""
    mins = list(samples[lo].point_m)
    maxs = list(samples[lo].point_m)
    for k in range(lo + 1, hi + 1):
        p = samples[k].point_m
        for axis in range(3):
            if p[axis] < mins[axis]:
                mins[axis] = p[axis]
            if p[axis] > maxs[axis]:
                maxs[axis] = p[axis]
    return sum(maxs[axis] - mins[axis] for axis in range(3))


def _make_fixation(samples: Sequence[GazeSample], lo: int, hi: int) -> Fixation:
    n = hi - lo + 1
    cx = sum(samples[k].point_m[0] for k in range(lo, hi + 1)) / n
    cy = sum(samples[k].point_m[1] for k in range(lo, hi + 1)) / n
    cz = sum(samples[k].point_m[2] for k in range(lo, hi + 1)) / n
    return Fixation(
        start_ms=samples[lo].t_ms,
        end_ms=samples[hi].t_ms,
        centroid_m=(cx, cy, cz),
        dispersion_m=_dispersion(samples, lo, hi),
        sample_count=n,
    )


def detect_fixations(
    gaze: Sequence[GazeSample], params: FixationParams = FixationParams()
) -> list[Fixation]:
    """Greedy left-to-right dispersion-threshold fixation detection.

    A window is expanded rightward while its dispersion (sum of per-axis
    coordinate ranges) stays within the threshold; a maximal window lasting
    at least the minimum duration becomes a fixation, otherwise the start
    advances by one sample.
    """
    for i in range(1, len(gaze)):
        if gaze[i].t_ms < gaze[i - 1].t_ms:
            raise GazeInputError(f"gaze samples out of order at index {i}")

    fixations: list[Fixation] = []
    n = len(gaze)
    i = 0
    while i < n:
        # Expand with incremental per-axis extents.
        mins = list(gaze[i].point_m)
        maxs = list(gaze[i].point_m)
        j = i
        while j + 1 < n:
            p = gaze[j + 1].point_m
            new_mins = [min(mins[a], p[a]) for a in range(3)]
            new_maxs = [max(maxs[a], p[a]) for a in range(3)]
            if sum(new_maxs[a] - new_mins[a] for a in range(3)) > params.dispersion_threshold_m:
                break
            mins, maxs = new_mins, new_maxs
            j += 1
        if gaze[j].t_ms - gaze[i].t_ms >= params.min_duration_ms and j > i:
            fixations.append(_make_fixation(gaze, i, j))
            i = j + 1
        else:
            i += 1
    return fixations


@dataclass(frozen=True)
class AoiEntry:
    aoi_id: str
    center_m: tuple[float, float, float]
    radius_m: float
    label: str = ""


@dataclass(frozen=True)
class AoiCatalog:
    entries: tuple[AoiEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.aoi_id in seen:
                raise ValueError(f"duplicate aoi_id: {e.aoi_id}")
            if e.radius_m <= 0:
                raise ValueError(f"aoi {e.aoi_id}: radius_m must be > 0")
            seen.add(e.aoi_id)

    def aoi_ids(self) -> list[str]:
        return [e.aoi_id for e in self.entries]


def map_fixation(
    fix: Fixation, catalog: AoiCatalog, event_id: str = ""
) -> Optional[SemanticEvent]:
    """Map a fixation to the nearest containing AOI, ties broken by catalog order."""
    best: Optional[AoiEntry] = None
    best_dist = math.inf
    for entry in catalog.entries:
        d = math.dist(fix.centroid_m, entry.center_m)
        if d <= entry.radius_m and d < best_dist:
            best = entry
            best_dist = d
    if best is None:
        return None
    return SemanticEvent(
        event_id=event_id or f"fixation_on_aoi@{fix.end_ms}",
        kind="fixation_on_aoi",
        source="gaze_analyzer",
        t_ms=fix.end_ms,
        confidence=1.0,
        attributes={"aoi_id": best.aoi_id, "duration_ms": fix.duration_ms},
    )


class GazeAnalyzer:
    """Streaming wrapper around detect_fixations with identical output.

    Buffers samples and re-runs the batch detector over the unconsumed
    suffix; a fixation is only released once a later sample has broken its
    window, so streaming output matches a single batch run over the whole
    trace. flush() releases a trailing fixation at session end.
    """

    def __init__(self, catalog: AoiCatalog, params: FixationParams = FixationParams()):
        self.catalog = catalog
        self.params = params
        self._buffer: list[GazeSample] = []
        self.dropped_unordered = 0

    def push(self, samples: Sequence[GazeSample]) -> list[Fixation]:
        for s in samples:
            if self._buffer and s.t_ms < self._buffer[-1].t_ms:
                self.dropped_unordered += 1
                continue
            self._buffer.append(s)
        return self._settled()

    def _settled(self) -> list[Fixation]:
        if len(self._buffer) < 2:
            return []
        found = detect_fixations(self._buffer, self.params)
        settled = [f for f in found if f.end_ms < self._buffer[-1].t_ms]
        if not settled:
            return []
        last_end = settled[-1].end_ms
        # Keep everything after the last settled fixation's final sample.
        cut = 0
        for idx, s in enumerate(self._buffer):
            if s.t_ms <= last_end:
                cut = idx + 1
        self._buffer = self._buffer[cut:]
        return settled

    def flush(self) -> list[Fixation]:
        remaining = detect_fixations(self._buffer, self.params)
        self._buffer = []
        return remaining

    def reset(self) -> None:
        self._buffer = []
