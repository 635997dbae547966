"""Per-window statistical features and train-only standardization.

Feature families, in fixed schema order: trimmed histogram (per channel),
mean, variance, mean difference to the previous window, and pairwise
Pearson correlation. With all families on and 100 bins a window yields
6*100 + 6 + 6 + 6 + 15 = 633 values.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ingest import CHANNELS
from .segment import Window

FAMILIES = ("histogram", "mean", "variance", "difference", "correlation")
PAIRS = tuple(combinations(range(6), 2))  # 15 channel pairs, lexicographic
STD_FLOOR = 1e-8


@dataclass(frozen=True)
class FeatureConfig:
    use_histogram: bool = True
    use_mean: bool = True
    use_variance: bool = True
    use_difference: bool = True
    use_correlation: bool = True
    histogram_bins: int = 100
    trim_keep_fraction: float = 0.95
    difference_uses_sum: bool = False  # literal sum-minus-mean reading

    def __post_init__(self):
        if not any(
            (self.use_histogram, self.use_mean, self.use_variance,
             self.use_difference, self.use_correlation)
        ):
            raise ValueError("at least one feature family must be enabled")
        if self.histogram_bins < 1:
            raise ValueError("histogram_bins must be >= 1")
        if not 0.0 < self.trim_keep_fraction <= 1.0:
            raise ValueError("trim_keep_fraction must be in (0, 1]")

    @property
    def families(self) -> tuple[str, ...]:
        on = {
            "histogram": self.use_histogram,
            "mean": self.use_mean,
            "variance": self.use_variance,
            "difference": self.use_difference,
            "correlation": self.use_correlation,
        }
        return tuple(f for f in FAMILIES if on[f])

    def dimension(self) -> int:
        return len(feature_schema(self))


def feature_config_from_families(
    families: Iterable[str], base: FeatureConfig | None = None
) -> FeatureConfig:
    """Build a config enabling exactly the named families ('all' enables every one)."""
    base = base or FeatureConfig()
    names = list(families)
    if names == ["all"]:
        names = list(FAMILIES)
    unknown = set(names) - set(FAMILIES)
    if unknown:
        raise ValueError(f"unknown feature families: {sorted(unknown)}")
    return FeatureConfig(
        use_histogram="histogram" in names,
        use_mean="mean" in names,
        use_variance="variance" in names,
        use_difference="difference" in names,
        use_correlation="correlation" in names,
        histogram_bins=base.histogram_bins,
        trim_keep_fraction=base.trim_keep_fraction,
        difference_uses_sum=base.difference_uses_sum,
    )


def feature_schema(cfg: FeatureConfig) -> tuple[tuple[str, str, int], ...]:
    """Deterministic (family, signal-or-pair, index) descriptor list for a config."""
    schema: list[tuple[str, str, int]] = []
    for family in cfg.families:
        if family == "histogram":
            for ch in CHANNELS:
                schema.extend(("histogram", ch, b) for b in range(cfg.histogram_bins))
        elif family == "correlation":
            for i, j in PAIRS:
                schema.append(("correlation", f"{CHANNELS[i]}:{CHANNELS[j]}", 0))
        else:
            schema.extend((family, ch, 0) for ch in CHANNELS)
    return tuple(schema)


def schema_labels(schema) -> tuple[str, ...]:
    return tuple(
        f"{fam}_{sig}_{idx:03d}" if fam == "histogram" else f"{fam}_{sig.replace(':', '_')}"
        for fam, sig, idx in schema
    )


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    schema: tuple
    driver_id: str
    partition: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.schema),):
            raise ValueError("values length must equal schema length")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def trimmed_histogram(signal, bins: int, keep: float) -> np.ndarray:
    """Normalized occupancy histogram over the central `keep` fraction of a signal.

    The trim range [q_lo, q_hi] is taken at the (1-keep)/2 and 1-(1-keep)/2
    empirical quantiles (linear interpolation). In-range samples are counted
    into `bins` equal-width bins over that range (last bin right-closed) and
    counts are normalized to sum to one. A constant signal puts all mass in
    bin 0.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("signal must be 1-D with at least 2 samples")
    tail = (1.0 - keep) / 2.0
    q_lo, q_hi = np.quantile(x, [tail, 1.0 - tail])
    out = np.zeros(bins)
    if q_lo == q_hi:
        out[0] = 1.0
        return out
    counts, _ = np.histogram(x[(x >= q_lo) & (x <= q_hi)], bins=bins, range=(q_lo, q_hi))
    return counts / counts.sum()


def window_mean(window: Window) -> np.ndarray:
    return window.channels.mean(axis=1)


def window_variance(window: Window) -> np.ndarray:
    """Per-channel population variance (divide by N)."""
    return window.channels.var(axis=1)


def window_difference(current: Window, previous: Window | None, use_sum: bool = False) -> np.ndarray:
    """Change in per-channel level relative to the preceding window.

    Default is mean(current) - mean(previous); `use_sum` switches the first
    term to the channel sum. The first window of a partition has no
    predecessor and reports zeros.
    """
    if previous is None:
        return np.zeros(6)
    if previous.channels.shape[1] != current.channels.shape[1]:
        raise ValueError("windows have mismatched channel lengths")
    level = current.channels.sum(axis=1) if use_sum else current.channels.mean(axis=1)
    return level - previous.channels.mean(axis=1)


def pairwise_correlation(window: Window) -> np.ndarray:
    """Pearson correlation for the 15 unordered channel pairs, clamped to [-1, 1].

    A pair involving a zero-variance channel reports 0.
    """
    x = window.channels
    centered = x - x.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / x.shape[1]
    sd = np.sqrt(np.diag(cov))
    out = np.empty(len(PAIRS))
    for k, (i, j) in enumerate(PAIRS):
        if sd[i] == 0.0 or sd[j] == 0.0:
            out[k] = 0.0
        else:
            out[k] = cov[i, j] / (sd[i] * sd[j])
    return np.clip(out, -1.0, 1.0)


def extract(window: Window, previous: Window | None, cfg: FeatureConfig) -> FeatureVector:
    """Concatenate the enabled feature families in schema order."""
    parts = []
    for family in cfg.families:
        if family == "histogram":
            parts.extend(
                trimmed_histogram(window.channels[c], cfg.histogram_bins, cfg.trim_keep_fraction)
                for c in range(6)
            )
        elif family == "mean":
            parts.append(window_mean(window))
        elif family == "variance":
            parts.append(window_variance(window))
        elif family == "difference":
            parts.append(window_difference(window, previous, cfg.difference_uses_sum))
        elif family == "correlation":
            parts.append(pairwise_correlation(window))
    return FeatureVector(
        values=np.concatenate(parts),
        schema=feature_schema(cfg),
        driver_id=window.driver_id,
        partition=window.partition,
    )


def extract_sequence(windows: Sequence[Window], cfg: FeatureConfig) -> list[FeatureVector]:
    """Featurize an ordered window sequence, chaining each window to its predecessor.

    Callers pass the windows of one partition of one trip, in time order, so
    the difference family never reaches across partitions or trips.
    """
    vectors = []
    previous = None
    for window in windows:
        vectors.append(extract(window, previous, cfg))
        previous = window
    return vectors


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-dimension z-score transform fitted on training vectors only."""

    mean: np.ndarray
    std: np.ndarray  # floored at STD_FLOOR

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean and std must be matching 1-D arrays")
        if (std <= 0).any():
            raise ValueError("std entries must be positive")
        mean.setflags(write=False)
        std.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def dimension(self) -> int:
        return self.mean.size


def fit_standardizer(train_vectors) -> Standardizer:
    """Fit per-dimension mean/std. Rejects anything tagged as test data."""
    matrix = _as_matrix(train_vectors, forbid_test=True)
    if matrix.shape[0] < 2:
        raise ValueError("need at least 2 training vectors to fit a standardizer")
    mean = matrix.mean(axis=0)
    std = np.maximum(matrix.std(axis=0), STD_FLOOR)
    return Standardizer(mean=mean, std=std)


def apply_standardizer(std: Standardizer, vector):
    """Z-score a vector or matrix with train statistics; never refits."""
    x = np.asarray(vector, dtype=np.float64)
    if x.shape[-1] != std.dimension:
        raise ValueError(f"dimension mismatch: vector has {x.shape[-1]}, standardizer {std.dimension}")
    return (x - std.mean) / std.std


def export_features(vectors: Sequence[FeatureVector], csv_path, schema_path=None) -> None:
    """Write a feature matrix as CSV plus a JSON schema sidecar."""
    if not vectors:
        raise ValueError("no feature vectors to export")
    labels = schema_labels(vectors[0].schema)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(labels) + ["driver_id", "partition"])
        for vec in vectors:
            writer.writerow([repr(float(v)) for v in vec.values] + [vec.driver_id, vec.partition])
    if schema_path is not None:
        schema = [list(entry) for entry in vectors[0].schema]
        Path(schema_path).write_text(json.dumps({"schema": schema}, indent=2), encoding="utf-8")


def _as_matrix(vectors, forbid_test: bool = False) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        return np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    rows = []
    for vec in vectors:
        if isinstance(vec, FeatureVector):
            if forbid_test and vec.partition == "test":
                raise ValueError("standardizer must be fitted on train vectors only")
            rows.append(vec.values)
        else:
            rows.append(np.asarray(vec, dtype=np.float64))
    return np.vstack(rows)
