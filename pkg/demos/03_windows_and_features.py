"""
Windowing and the statistical feature set
=========================================

Cleaned trips split chronologically (early 70% trains, the rest tests),
then each span is cut into overlapping fixed-length windows. A window
becomes one feature vector: 100 trimmed-histogram bins per channel plus
means, variances, deltas to the previous window, and the 15 channel
correlations — 633 dimensions in total.
"""
import numpy as np

from driverid import (
    FeatureConfig,
    SegmentationConfig,
    clean,
    extract_sequence,
    fit_standardizer,
    apply_standardizer,
    generate_trip,
    make_profiles,
    segment_trip,
)

profile = make_profiles(2, "easy", seed=5)[0]
trip, _ = generate_trip(profile, 3600, 2.0, driver_id="demo03")
cleaned = clean(trip)

seg = SegmentationConfig(window_minutes=5, overlap_fraction=0.5, train_fraction=0.7)
train_windows, test_windows = segment_trip(cleaned, seg)
print(f"{len(train_windows)} train windows, {len(test_windows)} test windows")
w = train_windows[0]
print(f"first window: [{w.start_t:.1f}, {w.end_t:.1f}) s, {len(w)} samples/channel")

cfg = FeatureConfig()  # all five families, 100 bins, central 95% trim
vectors = extract_sequence(train_windows, cfg)
print(f"\nfeature vector dimension: {vectors[0].values.size}")
families = {}
for fam, _, _ in vectors[0].schema:
    families[fam] = families.get(fam, 0) + 1
print("dimensions per family:", families)

standardizer = fit_standardizer(vectors)
z = apply_standardizer(standardizer, np.vstack([v.values for v in vectors]))
print(f"standardized train matrix: mean {z.mean():.2e}, per-dim variance ~{z.var(axis=0).mean():.3f}")

test_vectors = extract_sequence(test_windows, cfg)
z_test = apply_standardizer(standardizer, np.vstack([v.values for v in test_vectors]))
print(f"test matrix transformed with train statistics only: shape {z_test.shape}")
