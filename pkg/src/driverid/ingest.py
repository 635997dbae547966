"""Parsing, validation and serialization of raw trip logs.

A trip log is UTF-8 CSV with the fixed header ``t,ax,ay,az,gx,gy,gz``:
one row per sample, timestamps in seconds, acceleration in m/s^2, angular
velocity in rad/s, decimal point ``.``, missing channel values written as
the literal ``NaN``. The driver label and nominal rate are not part of the
file; they come from the manifest.
"""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CHANNELS = ("ax", "ay", "az", "gx", "gy", "gz")
ACCEL_COLUMNS = slice(0, 3)
GYRO_COLUMNS = slice(3, 6)
LOG_HEADER = "t," + ",".join(CHANNELS)


@dataclass(frozen=True)
class SensorSample:
    """One timestamped 6-channel IMU reading. NaN marks a missing channel."""

    t: float
    ax: float
    ay: float
    az: float
    gx: float
    gy: float
    gz: float

    def values(self) -> np.ndarray:
        return np.array([self.ax, self.ay, self.az, self.gx, self.gy, self.gz])


@dataclass(frozen=True, eq=False)
class Trip:
    """An ordered, labeled 6-channel recording for one driver.

    `t` has shape (n,), strictly increasing, seconds. `data` has shape
    (n, 6) in CHANNELS order; NaN entries are missing values. Arrays are
    frozen read-only so trips can be shared across threads.
    """

    driver_id: str
    t: np.ndarray
    data: np.ndarray
    nominal_rate_hz: float = 2.0

    def __post_init__(self):
        if not self.driver_id:
            raise ValueError("driver_id must be nonempty")
        if self.nominal_rate_hz <= 0:
            raise ValueError("nominal_rate_hz must be positive")
        t = np.asarray(self.t, dtype=np.float64)
        data = np.asarray(self.data, dtype=np.float64)
        if t.ndim != 1 or data.shape != (t.size, 6):
            raise ValueError(f"expected t (n,) and data (n, 6), got {t.shape} and {data.shape}")
        if t.size and t[0] < 0:
            raise ValueError("timestamps must be nonnegative")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("timestamps must be strictly increasing")
        t.setflags(write=False)
        data.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "data", data)

    def __len__(self) -> int:
        return self.t.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trip):
            return NotImplemented
        return (
            self.driver_id == other.driver_id
            and self.nominal_rate_hz == other.nominal_rate_hz
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.data, other.data, equal_nan=True)
        )

    @property
    def samples(self) -> list[SensorSample]:
        return [SensorSample(float(ti), *map(float, row)) for ti, row in zip(self.t, self.data)]

    @classmethod
    def from_samples(cls, driver_id: str, samples, nominal_rate_hz: float = 2.0) -> "Trip":
        samples = list(samples)
        t = np.array([s.t for s in samples], dtype=np.float64)
        data = np.array([s.values() for s in samples], dtype=np.float64).reshape(len(samples), 6)
        return cls(driver_id, t, data, nominal_rate_hz)


@dataclass(frozen=True)
class ValidationReport:
    """Exact counts from a read-only pass over a trip."""

    n_samples: int
    n_missing: int  # samples with at least one missing channel
    n_gaps: int     # inter-sample intervals longer than 2 / nominal_rate_hz


def parse_log(source, driver_id: str, rate_hz: float = 2.0) -> Trip:
    """Parse a trip log into a Trip.

    `source` may be a path, bytes, a text string containing the log, or an
    open file object. Rows whose channel fields do not parse as finite
    numbers keep the row with those channels flagged missing; rows whose
    timestamp does not parse are dropped and counted in a single summary
    warning. Non-monotonic timestamps abort with an error naming the line.
    """
    text = _read_text(source)
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ValueError("empty log")
    header = lines[0].strip().lstrip("﻿")
    if header != LOG_HEADER:
        raise ValueError(f"malformed header: expected {LOG_HEADER!r}, got {header!r}")

    ts: list[float] = []
    rows: list[list[float]] = []
    rejected = 0
    prev_t = -np.inf
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 7:
            rejected += 1
            continue
        try:
            t = float(fields[0])
        except ValueError:
            rejected += 1
            continue
        if not np.isfinite(t):
            rejected += 1
            continue
        if t < 0:
            raise ValueError(f"negative timestamp at line {lineno}")
        if t <= prev_t:
            raise ValueError(f"non-monotonic timestamp at line {lineno}")
        prev_t = t
        row = []
        for field in fields[1:]:
            try:
                value = float(field)
            except ValueError:
                value = np.nan
            if not np.isfinite(value):
                value = np.nan
            row.append(value)
        ts.append(t)
        rows.append(row)

    if rejected:
        warnings.warn(f"rejected {rejected} rows with unparseable timestamps or field counts")
    if not ts:
        raise ValueError("empty log")
    return Trip(driver_id, np.array(ts), np.array(rows), rate_hz)


def serialize_log(trip: Trip) -> str:
    """Render a trip in the canonical log format. parse_log inverts this exactly."""
    out = [LOG_HEADER]
    for ti, row in zip(trip.t, trip.data):
        fields = [_format_value(ti)]
        fields.extend(_format_value(v) for v in row)
        out.append(",".join(fields))
    return "\n".join(out) + "\n"


def write_log(trip: Trip, path) -> None:
    Path(path).write_text(serialize_log(trip), encoding="utf-8")


def read_log(path, driver_id: str, rate_hz: float = 2.0) -> Trip:
    return parse_log(Path(path), driver_id, rate_hz)


def validate_trip(trip: Trip) -> ValidationReport:
    """Count samples, missing-channel samples and sampling gaps. Never mutates."""
    missing = int(np.isnan(trip.data).any(axis=1).sum())
    gap_limit = 2.0 / trip.nominal_rate_hz
    gaps = int((np.diff(trip.t) > gap_limit).sum()) if len(trip) > 1 else 0
    return ValidationReport(n_samples=len(trip), n_missing=missing, n_gaps=gaps)


def _format_value(value: float) -> str:
    value = float(value)
    if not np.isfinite(value):
        return "NaN"
    return repr(value)


def _read_text(source) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, str):
        # A path if it points at an existing file, otherwise log content.
        if "\n" not in source and Path(source).is_file():
            return Path(source).read_text(encoding="utf-8")
        return source
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, io.TextIOBase):
        return source.read()
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data
