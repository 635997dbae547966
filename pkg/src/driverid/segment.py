"""Chronological train/test splitting and overlapping window cutting.

The split is chronological over movement samples (earliest fraction trains,
the remainder tests) so that no time span can contribute to both
partitions. Windows are cut per partition; a window is emitted only when it
lies fully inside its span and bridges no continuity break.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .preprocess import CleanTrip

TRAIN = "train"
TEST = "test"


@dataclass(frozen=True)
class SegmentationConfig:
    window_minutes: float = 15.0
    overlap_fraction: float = 0.75
    train_fraction: float = 0.7

    def __post_init__(self):
        if self.window_minutes <= 0:
            raise ValueError("window_minutes must be positive")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must be in [0, 1)")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")

    def window_samples(self, rate_hz: float) -> int:
        return int(round(self.window_minutes * 60.0 * rate_hz))

    def stride_samples(self, rate_hz: float) -> int:
        w = self.window_samples(rate_hz)
        return max(1, int(round(w * (1.0 - self.overlap_fraction))))


@dataclass(frozen=True, eq=False)
class Span:
    """A contiguous chronological slice of a cleaned trip, tagged train or test."""

    driver_id: str
    t: np.ndarray
    data: np.ndarray            # (n, 6)
    break_after: np.ndarray     # (n-1,) bool
    nominal_rate_hz: float
    partition: str

    def __len__(self) -> int:
        return self.t.size


@dataclass(frozen=True, eq=False)
class Window:
    """A fixed-duration 6-channel slice with its label and half-open time span."""

    driver_id: str
    start_t: float
    end_t: float
    channels: np.ndarray        # (6, w) in channel order
    partition: str

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim != 2 or ch.shape[0] != 6 or ch.shape[1] < 2:
            raise ValueError("channels must be a (6, w) array with w >= 2")
        ch.setflags(write=False)
        object.__setattr__(self, "channels", ch)

    def __len__(self) -> int:
        return self.channels.shape[1]


def split_train_test(
    trip: CleanTrip, train_fraction: float, min_span_samples: int = 1
) -> tuple[Span, Span]:
    """Split a trip chronologically into train and test spans.

    The earliest floor(train_fraction * n) samples train; the rest test.
    `min_span_samples` lets callers demand room for at least one window on
    each side; a short side raises "insufficient data for split".
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(trip)
    n_train = int(np.floor(train_fraction * n))
    n_test = n - n_train
    if n_train < min_span_samples or n_test < min_span_samples:
        raise ValueError(
            f"insufficient data for split: trip {trip.driver_id!r} has {n} samples, "
            f"split gives {n_train}/{n_test}, need {min_span_samples} per side"
        )
    return (
        _span(trip, 0, n_train, TRAIN),
        _span(trip, n_train, n, TEST),
    )


def cut_windows(span: Span, cfg: SegmentationConfig, rate_hz: float) -> list[Window]:
    """Cut fixed-length overlapping windows from a span.

    Windows start every stride samples; only windows that fit entirely in
    the span and cross no recorded continuity break are emitted, and a
    trailing partial window is discarded. A span shorter than one window
    yields an empty list.
    """
    w = cfg.window_samples(rate_hz)
    if w < 2:
        raise ValueError(f"window of {cfg.window_minutes} min at {rate_hz} Hz has {w} samples")
    stride = cfg.stride_samples(rate_hz)
    n = len(span)
    if n < w:
        return []

    # prefix sum of break flags for O(1) "any break inside?" checks
    break_cum = np.concatenate([[0], np.cumsum(span.break_after.astype(np.int64))])
    period = 1.0 / rate_hz
    windows = []
    for off in range(0, n - w + 1, stride):
        if break_cum[off + w - 1] - break_cum[off] > 0:
            continue
        windows.append(
            Window(
                driver_id=span.driver_id,
                start_t=float(span.t[off]),
                end_t=float(span.t[off + w - 1] + period),
                channels=span.data[off : off + w].T.copy(),
                partition=span.partition,
            )
        )
    return windows


def segment_trip(
    trip: CleanTrip, cfg: SegmentationConfig
) -> tuple[list[Window], list[Window]]:
    """Split then window one cleaned trip; returns (train windows, test windows)."""
    rate = trip.nominal_rate_hz
    w = cfg.window_samples(rate)
    train_span, test_span = split_train_test(trip, cfg.train_fraction, min_span_samples=w)
    return cut_windows(train_span, cfg, rate), cut_windows(test_span, cfg, rate)


def _span(trip: CleanTrip, start: int, stop: int, partition: str) -> Span:
    return Span(
        driver_id=trip.driver_id,
        t=trip.t[start:stop],
        data=trip.data[start:stop],
        break_after=trip.break_after[start : max(stop - 1, start)],
        nominal_rate_hz=trip.nominal_rate_hz,
        partition=partition,
    )
