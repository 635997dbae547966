"""Trip cleaning chain: denoise, reorient, fill or drop missing values, delete stops.

Stages run in a fixed order (moving-average denoise, gravity reorientation,
gap handling, stop removal) and each stage is a pure trip-to-trip function.
Stop intervals are half-open [start_t, end_t) with end_t one sample period
past the last stopped sample, so interval durations add up exactly to the
removed data time.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ingest import ACCEL_COLUMNS, Trip

GRAVITY = 9.81


@dataclass(frozen=True)
class CleaningConfig:
    denoise_window: int = 5
    stop_threshold: float = 0.5       # m/s^2 band for "unchanged" magnitude
    min_stop_seconds: float = 6.0
    max_gap_fill: float = 2.0         # longest missing span bridged by interpolation
    reorient: bool = True
    stop_aggregate: str = "magnitude"  # or "sum" of the three accel axes

    def __post_init__(self):
        if self.denoise_window < 1 or self.denoise_window % 2 == 0:
            raise ValueError("denoise_window must be a positive odd integer")
        for name in ("stop_threshold", "min_stop_seconds", "max_gap_fill"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.stop_aggregate not in ("magnitude", "sum"):
            raise ValueError("stop_aggregate must be 'magnitude' or 'sum'")


@dataclass(frozen=True)
class StopInterval:
    """Half-open [start_t, end_t) span of stopped driving."""

    start_t: float
    end_t: float

    @property
    def duration(self) -> float:
        return self.end_t - self.start_t


@dataclass(frozen=True, eq=False)
class CleanTrip:
    """Analysis-ready trip: no missing channels, stop time deleted.

    Timestamps keep their original values (time is never re-compacted);
    `break_after[i]` flags a continuity break between samples i and i+1 so
    that windowing never bridges removed time. `stop_intervals` are the
    deleted spans; `removed_gap_seconds` counts samples dropped by gap
    handling.
    """

    driver_id: str
    t: np.ndarray
    data: np.ndarray
    nominal_rate_hz: float
    removed_stop_seconds: float = 0.0
    removed_gap_seconds: float = 0.0
    stop_intervals: tuple[StopInterval, ...] = ()
    provenance: tuple[str, ...] = ()
    break_after: np.ndarray = field(default=None)  # bool, shape (n-1,)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        data = np.asarray(self.data, dtype=np.float64)
        if t.size == 0:
            raise ValueError("no movement data")
        if np.isnan(data).any():
            raise ValueError("CleanTrip may not contain missing channels")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("timestamps must be strictly increasing")
        breaks = self.break_after
        if breaks is None:
            breaks = np.zeros(max(t.size - 1, 0), dtype=bool)
        breaks = np.asarray(breaks, dtype=bool)
        if breaks.shape != (max(t.size - 1, 0),):
            raise ValueError("break_after must have length n-1")
        for arr in (t, data, breaks):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "break_after", breaks)

    def __len__(self) -> int:
        return self.t.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, CleanTrip):
            return NotImplemented
        return (
            self.driver_id == other.driver_id
            and self.nominal_rate_hz == other.nominal_rate_hz
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.data, other.data)
            and np.array_equal(self.break_after, other.break_after)
        )

    @property
    def duration_seconds(self) -> float:
        """Movement data time, counted as samples over the nominal rate."""
        return len(self) / self.nominal_rate_hz

    def to_trip(self) -> Trip:
        return Trip(self.driver_id, self.t.copy(), self.data.copy(), self.nominal_rate_hz)

    def sidecar(self) -> dict:
        return {
            "driver_id": self.driver_id,
            "nominal_rate_hz": self.nominal_rate_hz,
            "provenance": list(self.provenance),
            "removed_stop_seconds": self.removed_stop_seconds,
            "removed_gap_seconds": self.removed_gap_seconds,
            "stop_intervals": [[s.start_t, s.end_t] for s in self.stop_intervals],
        }


def denoise(trip: Trip, window: int) -> Trip:
    """Centered moving average per channel.

    The averaging window is clipped at the signal edges (it shrinks rather
    than padding). Missing values are excluded from every average and stay
    missing in the output.
    """
    n = len(trip)
    if window % 2 == 0 or window < 1:
        raise ValueError("denoise window must be a positive odd integer")
    if window > n:
        raise ValueError(f"denoise window {window} exceeds sample count {n}")
    if window == 1:
        return trip

    half = window // 2
    x = trip.data
    valid = ~np.isnan(x)
    filled = np.where(valid, x, 0.0)
    csum = np.vstack([np.zeros(6), np.cumsum(filled, axis=0)])
    ccnt = np.vstack([np.zeros(6), np.cumsum(valid, axis=0)])
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    sums = csum[hi] - csum[lo]
    counts = ccnt[hi] - ccnt[lo]
    with np.errstate(invalid="ignore"):
        out = sums / counts
    out[~valid] = np.nan
    return Trip(trip.driver_id, trip.t.copy(), out, trip.nominal_rate_hz)


def gravity_rotation(mean_accel: np.ndarray) -> np.ndarray:
    """Rotation matrix taking `mean_accel` onto the +z gravity axis."""
    u = np.asarray(mean_accel, dtype=np.float64)
    norm = np.linalg.norm(u)
    if norm < 1.0:
        raise ValueError("cannot estimate gravity")
    u = u / norm
    target = np.array([0.0, 0.0, 1.0])
    v = np.cross(u, target)
    s2 = float(v @ v)
    c = float(u @ target)
    if s2 < 1e-24:
        if c > 0:
            return np.eye(3)
        # anti-parallel: flip 180 degrees about the first canonical axis
        return np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / s2)


def reorient(trip: Trip) -> Trip:
    """Rotate all six channels so the trip-mean accelerometer vector points at +z.

    A single rigid rotation is estimated from samples with a complete
    accelerometer triple and applied to both the accelerometer and the
    gyroscope, so per-sample vector magnitudes are preserved.
    """
    accel = trip.data[:, ACCEL_COLUMNS]
    complete = ~np.isnan(accel).any(axis=1)
    if not complete.any():
        raise ValueError("cannot estimate gravity")
    _require_contiguous_span(trip, complete, 10.0)
    mean_accel = accel[complete].mean(axis=0)
    rot = gravity_rotation(mean_accel)
    out = trip.data.copy()
    out[:, 0:3] = trip.data[:, 0:3] @ rot.T
    out[:, 3:6] = trip.data[:, 3:6] @ rot.T
    return Trip(trip.driver_id, trip.t.copy(), out, trip.nominal_rate_hz)


def fill_gaps(trip: Trip, max_gap_fill: float) -> Trip:
    """Interpolate short missing runs, drop samples covered by long ones.

    A missing run on a channel is bridged linearly when the time span
    between its two valid anchor samples is at most `max_gap_fill` seconds;
    otherwise the covered samples are removed from the trip entirely.
    Leading and trailing missing runs have no anchor pair and are removed.
    """
    n = len(trip)
    data = trip.data.copy()
    t = trip.t
    if not (~np.isnan(trip.data)).all(axis=1).any():
        raise ValueError("no valid data")

    drop = np.zeros(n, dtype=bool)
    for col in range(6):
        x = trip.data[:, col]
        invalid = np.isnan(x)
        if not invalid.any():
            continue
        for start, stop in _runs(invalid):  # [start, stop) of missing samples
            prev_anchor = start - 1
            next_anchor = stop
            if prev_anchor < 0 or next_anchor >= n:
                drop[start:stop] = True
                continue
            span = t[next_anchor] - t[prev_anchor]
            if span > max_gap_fill:
                drop[start:stop] = True
            else:
                data[start:stop, col] = np.interp(
                    t[start:stop],
                    [t[prev_anchor], t[next_anchor]],
                    [x[prev_anchor], x[next_anchor]],
                )

    if drop.any():
        keep = ~drop
        data = data[keep]
        t = t[keep]
    if t.size == 0:
        raise ValueError("no valid data")
    return Trip(trip.driver_id, np.array(t), data, trip.nominal_rate_hz)


def detect_stops(
    trip: Trip,
    threshold: float = 0.5,
    min_stop_seconds: float = 6.0,
    aggregate: str = "magnitude",
) -> list[StopInterval]:
    """Find maximal runs where the aggregated acceleration stays within a band.

    The per-sample aggregate m(t) is the Euclidean magnitude of the three
    accelerometer axes (or their plain sum when aggregate="sum"). A stop is
    a maximal run of consecutive samples with max(m) - min(m) <= threshold
    whose half-open duration reaches min_stop_seconds. Runs never bridge a
    sampling discontinuity longer than two sample periods. Returned
    intervals are disjoint and sorted.
    """
    accel = trip.data[:, ACCEL_COLUMNS]
    if np.isnan(accel).any():
        raise ValueError("detect_stops requires gap-filled accelerometer channels")
    if aggregate == "magnitude":
        m = np.sqrt((accel**2).sum(axis=1))
    elif aggregate == "sum":
        m = accel.sum(axis=1)
    else:
        raise ValueError("aggregate must be 'magnitude' or 'sum'")

    period = 1.0 / trip.nominal_rate_hz
    t = trip.t
    stops: list[StopInterval] = []
    contiguous = np.diff(t) <= 2.0 * period if len(trip) > 1 else np.array([], dtype=bool)
    block_start = 0
    for block_end in list(np.nonzero(~contiguous)[0] + 1) + [len(trip)]:
        stops.extend(
            _stops_in_block(m, t, block_start, block_end, threshold, min_stop_seconds, period)
        )
        block_start = block_end
    return stops


def _stops_in_block(m, t, start, end, threshold, min_stop_seconds, period):
    """Greedy left-to-right maximal in-band runs within one contiguous block."""
    stops = []
    maxq: deque[int] = deque()  # indices, decreasing m
    minq: deque[int] = deque()  # indices, increasing m
    i = start
    j = start  # next sample to absorb
    while i < end:
        if j < i:
            j = i
        while j < end:
            # try to extend the run [i, j] by sample j
            while maxq and maxq[0] < i:
                maxq.popleft()
            while minq and minq[0] < i:
                minq.popleft()
            hi = m[maxq[0]] if maxq else -np.inf
            lo = m[minq[0]] if minq else np.inf
            if max(hi, m[j]) - min(lo, m[j]) > threshold:
                break
            while maxq and m[maxq[-1]] <= m[j]:
                maxq.pop()
            maxq.append(j)
            while minq and m[minq[-1]] >= m[j]:
                minq.pop()
            minq.append(j)
            j += 1
        # maximal run is [i, j)
        if j > i and (t[j - 1] - t[i] + period) >= min_stop_seconds:
            stops.append(StopInterval(float(t[i]), float(t[j - 1] + period)))
            i = j
            maxq.clear()
            minq.clear()
        else:
            i += 1
    return stops


def remove_stops(trip: Trip, stops: Sequence[StopInterval]) -> CleanTrip:
    """Delete all samples inside the stop intervals, keeping original timestamps.

    Continuity breaks created by the removal (and any pre-existing sampling
    holes longer than two periods) are recorded so downstream windowing can
    refuse to span them.
    """
    stops = list(stops)
    for a, b in zip(stops, stops[1:]):
        if b.start_t < a.end_t:
            raise ValueError("stop intervals must be sorted and disjoint")
    for s in stops:
        if s.end_t <= s.start_t:
            raise ValueError("stop interval must have positive duration")

    if np.isnan(trip.data).any():
        raise ValueError("remove_stops requires gap-filled channels")

    keep = np.ones(len(trip), dtype=bool)
    for s in stops:
        keep &= ~((trip.t >= s.start_t) & (trip.t < s.end_t))
    if not keep.any():
        raise ValueError("no movement data")

    t = trip.t[keep]
    data = trip.data[keep]
    period = 1.0 / trip.nominal_rate_hz
    kept_idx = np.nonzero(keep)[0]
    removed_between = np.diff(kept_idx) > 1
    long_dt = np.diff(t) > 2.0 * period
    breaks = removed_between | long_dt

    return CleanTrip(
        driver_id=trip.driver_id,
        t=t,
        data=data,
        nominal_rate_hz=trip.nominal_rate_hz,
        removed_stop_seconds=float(sum(s.duration for s in stops)),
        stop_intervals=tuple(stops),
        provenance=("remove_stops",),
        break_after=breaks,
    )


def clean(trip: Trip, cfg: CleaningConfig = CleaningConfig()) -> CleanTrip:
    """Run the full cleaning chain and record its provenance."""
    provenance = []
    stage = denoise(trip, cfg.denoise_window)
    provenance.append("denoise")
    if cfg.reorient:
        stage = reorient(stage)
        provenance.append("reorient")
    before_fill = len(stage)
    stage = fill_gaps(stage, cfg.max_gap_fill)
    provenance.append("fill_gaps")
    removed_gap_seconds = (before_fill - len(stage)) / trip.nominal_rate_hz

    stops = detect_stops(stage, cfg.stop_threshold, cfg.min_stop_seconds, cfg.stop_aggregate)
    cleaned = remove_stops(stage, stops)
    provenance.append("remove_stops")
    return replace(
        cleaned,
        removed_gap_seconds=removed_gap_seconds,
        provenance=tuple(provenance),
    )


def _runs(mask: np.ndarray):
    """Yield [start, stop) index pairs of maximal True runs."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.diff(padded.astype(np.int8))
    starts = np.nonzero(edges == 1)[0]
    stops = np.nonzero(edges == -1)[0]
    return zip(starts, stops)


def _require_contiguous_span(trip: Trip, mask: np.ndarray, min_seconds: float) -> None:
    period = 1.0 / trip.nominal_rate_hz
    best = 0.0
    for start, stop in _runs(mask):
        best = max(best, trip.t[stop - 1] - trip.t[start] + period)
    if best < min_seconds - 1e-9:
        raise ValueError(
            f"cannot estimate gravity: need {min_seconds:.0f}s of complete "
            f"accelerometer data, longest run is {best:.1f}s"
        )
