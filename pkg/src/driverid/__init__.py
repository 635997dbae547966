"""Driver identification from smartphone accelerometer/gyroscope trip logs.

Pipeline: ingest raw 6-channel logs, clean them (denoise, reorient, gap
handling, stop deletion), cut overlapping windows chronologically split
into train/test, extract trimmed-histogram and statistical features,
standardize on train data, and classify windows with kNN, decision tree,
random forest or an MLP.
"""
from __future__ import annotations

from .evaluation import EvaluationReport, GridSpec, evaluate, run_grid
from .features import (
    FeatureConfig,
    FeatureVector,
    Standardizer,
    apply_standardizer,
    extract,
    extract_sequence,
    fit_standardizer,
    pairwise_correlation,
    trimmed_histogram,
    window_difference,
    window_mean,
    window_variance,
)
from .ingest import CHANNELS, SensorSample, Trip, ValidationReport, parse_log, serialize_log, validate_trip
from .models import (
    LabeledDataset,
    MlpConfig,
    TrainedModel,
    dtree_predict,
    dtree_train,
    knn_predict,
    knn_train,
    load_model,
    mlp_predict,
    mlp_predict_proba,
    mlp_train,
    predict,
    rf_predict,
    rf_train,
    save_model,
)
from .pipeline import build_datasets, train_model
from .preprocess import (
    CleaningConfig,
    CleanTrip,
    StopInterval,
    clean,
    denoise,
    detect_stops,
    fill_gaps,
    remove_stops,
    reorient,
)
from .segment import SegmentationConfig, Window, cut_windows, segment_trip, split_train_test
from .synth import DriverProfile, SyntheticTruth, generate_trip, make_profiles

__version__ = "0.1.0"
