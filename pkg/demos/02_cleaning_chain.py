"""
The cleaning chain, stage by stage
==================================

Denoise with a centered moving average, rotate the device frame onto
gravity, patch or drop missing values, then find and delete stop time.
Timestamps survive untouched; the output records what was removed.
"""
import numpy as np

from driverid import CleaningConfig, clean, denoise, detect_stops, fill_gaps, generate_trip, make_profiles, reorient

profile = make_profiles(2, "easy", seed=3)[0]
trip, truth = generate_trip(
    profile, 1800, 2.0, driver_id="demo02",
    missing_rate_per_hour=8.0, missing_duration_range=(1.0, 5.0),
)
print(f"raw trip: {len(trip)} samples, {np.isnan(trip.data).sum()} missing values")
print(f"truth stops: {[(round(a, 1), round(b, 1)) for a, b in truth.stop_intervals]}")

smoothed = denoise(trip, window=5)
print(f"\nafter denoise: per-channel std {np.nanstd(trip.data[:, 2]):.2f} -> {np.nanstd(smoothed.data[:, 2]):.2f} (az)")

oriented = reorient(smoothed)
mean_accel = np.nanmean(oriented.data[:, 0:3], axis=0)
print(f"after reorient: mean accel = ({mean_accel[0]:.3f}, {mean_accel[1]:.3f}, {mean_accel[2]:.3f})")

filled = fill_gaps(oriented, max_gap_fill=2.0)
print(f"after fill_gaps: {len(filled)} samples, {np.isnan(filled.data).sum()} missing left")

stops = detect_stops(filled, threshold=0.5, min_stop_seconds=6.0)
print(f"detected stops: {[(round(s.start_t, 1), round(s.end_t, 1)) for s in stops]}")

# or run the whole chain in one call
cleaned = clean(trip, CleaningConfig())
print(f"\nclean(): {len(cleaned)} samples kept, provenance {cleaned.provenance}")
print(
    f"removed {cleaned.removed_stop_seconds:.1f} s of stops and "
    f"{cleaned.removed_gap_seconds:.1f} s of gaps; movement {cleaned.duration_seconds:.1f} s"
)
