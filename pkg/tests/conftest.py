"""Shared fixtures: small synthetic trips and the session-scoped benchmark corpus."""
from __future__ import annotations

import dataclasses

import numpy as np
import pytest

import driverid as d

BENCH_SEED = 1234
BENCH_DRIVERS = 10
BENCH_HOURS = 4.0


@pytest.fixture(scope="session")
def easy_profiles():
    return d.make_profiles(BENCH_DRIVERS, "easy", BENCH_SEED)


@pytest.fixture(scope="session")
def easy_corpus(easy_profiles):
    """Cleaned 10-driver corpus used by the end-to-end acceptance checks."""
    trips = []
    for i, profile in enumerate(easy_profiles):
        trip, _ = d.generate_trip(
            profile, BENCH_HOURS * 3600.0, 2.0, driver_id=f"driver{i + 1:02d}"
        )
        trips.append(d.clean(trip))
    return trips


@pytest.fixture(scope="session")
def bench_bundle(easy_corpus):
    from driverid.features import FeatureConfig
    from driverid.pipeline import build_datasets
    from driverid.segment import SegmentationConfig

    seg = SegmentationConfig(window_minutes=15, overlap_fraction=0.75, train_fraction=0.7)
    return build_datasets(easy_corpus, seg, FeatureConfig())


@pytest.fixture
def quiet_trip():
    """Uniform 2 Hz trip with no missing values, no stops worth deleting."""
    rng = np.random.default_rng(0)
    n = 400
    t = np.arange(n) / 2.0
    data = rng.standard_normal((n, 6))
    data[:, 2] += 9.81
    return d.Trip("quiet", t, data, 2.0)


def stoppy_profile(seed: int, stops_per_hour: float = 2.5) -> d.DriverProfile:
    profile = d.make_profiles(10, "easy", seed)[seed % 10]
    return dataclasses.replace(profile, stop_frequency=stops_per_hour)
