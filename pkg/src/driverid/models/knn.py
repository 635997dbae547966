"""k-nearest-neighbor classifier on Euclidean distance.

Deterministic by construction: distance ties prefer the lower training-row
index, vote ties prefer the earlier class in class_list.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import LabeledDataset, TrainedModel, as_query_matrix, check_training_data


@dataclass
class KnnParams:
    k: int
    train_x: np.ndarray       # (n, d)
    train_y: np.ndarray       # (n,) class indices


def knn_train(data: LabeledDataset, k: int = 5) -> TrainedModel:
    check_training_data(data)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(data):
        raise ValueError(f"k={k} exceeds {len(data)} training rows")
    params = KnnParams(k=int(k), train_x=data.features.copy(), train_y=data.label_indices)
    return TrainedModel(
        kind="knn",
        params=params,
        class_list=data.class_list,
        n_features=data.n_features,
        schema_labels=data.schema_labels,
    )


def knn_predict(model: TrainedModel, x):
    """Majority label among the k nearest training rows."""
    matrix, single = as_query_matrix(model, x)
    p = model.params
    n_classes = len(model.class_list)
    out = np.empty(matrix.shape[0], dtype=object)
    for row, q in enumerate(matrix):
        d2 = ((p.train_x - q) ** 2).sum(axis=1)
        order = np.argsort(d2, kind="stable")[: p.k]
        votes = np.bincount(p.train_y[order], minlength=n_classes)
        out[row] = model.class_list[int(np.argmax(votes))]
    return out[0] if single else out
