"""Shared dataset and trained-model containers for the classifiers.

All four classifiers consume a LabeledDataset of standardized feature rows
and produce a TrainedModel. Predictions always take vectors in the same
(standardized) space the model was trained in; the fitted Standardizer is
carried on the model so persisted models can transform fresh raw features.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from ..features import FeatureVector, Standardizer

MODEL_KINDS = ("knn", "dtree", "rforest", "mlp")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray          # (n, d)
    labels: np.ndarray            # (n,) driver ids
    class_list: tuple[str, ...]   # sorted distinct driver ids
    schema_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=object)
        if features.ndim != 2 or features.shape[0] != labels.shape[0]:
            raise ValueError("features must be (n, d) with one label per row")
        if not np.isfinite(features).all():
            raise ValueError("features must be finite")
        if tuple(sorted(set(self.class_list))) != tuple(self.class_list):
            raise ValueError("class_list must be sorted and distinct")
        unknown = set(labels) - set(self.class_list)
        if unknown:
            raise ValueError(f"labels outside class_list: {sorted(unknown)}")
        features.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def label_indices(self) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.class_list)}
        return np.array([lookup[label] for label in self.labels], dtype=np.int64)

    @classmethod
    def from_vectors(
        cls, vectors: Sequence[FeatureVector], class_list: Sequence[str] | None = None
    ) -> "LabeledDataset":
        if not vectors:
            raise ValueError("no feature vectors")
        features = np.vstack([v.values for v in vectors])
        labels = np.array([v.driver_id for v in vectors], dtype=object)
        if class_list is None:
            class_list = sorted(set(labels))
        from ..features import schema_labels as _labels

        return cls(
            features=features,
            labels=labels,
            class_list=tuple(class_list),
            schema_labels=_labels(vectors[0].schema),
        )


@dataclass
class TrainedModel:
    kind: str
    params: Any
    class_list: tuple[str, ...]
    n_features: int
    standardizer: Optional[Standardizer] = None
    schema_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(self.class_list) < 1:
            raise ValueError("class_list must be nonempty")


def check_training_data(data: LabeledDataset) -> None:
    if len(data.class_list) < 2:
        raise ValueError("training data must contain at least 2 classes")
    if len(data) < 2:
        raise ValueError("training data must contain at least 2 rows")


def as_query_matrix(model: TrainedModel, x) -> tuple[np.ndarray, bool]:
    """Normalize a query to (m, d); returns (matrix, was_single_vector)."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    matrix = np.atleast_2d(arr)
    if matrix.shape[1] != model.n_features:
        raise ValueError(
            f"dimension mismatch: query has {matrix.shape[1]} features, model expects {model.n_features}"
        )
    return matrix, single
