"""Classifiers behind a uniform train/predict contract.

All predictors accept a single feature vector or an (m, d) matrix of
vectors in the standardized feature space and return driver-id labels.
"""
from __future__ import annotations

from .base import MODEL_KINDS, LabeledDataset, TrainedModel
from .forest import rf_predict, rf_train
from .io import load_model, save_model
from .knn import knn_predict, knn_train
from .mlp import MlpConfig, mlp_predict, mlp_predict_proba, mlp_train
from .tree import dtree_predict, dtree_train

_PREDICTORS = {
    "knn": knn_predict,
    "dtree": dtree_predict,
    "rforest": rf_predict,
    "mlp": mlp_predict,
}


def predict(model: TrainedModel, x):
    """Dispatch to the model kind's predictor."""
    return _PREDICTORS[model.kind](model, x)


__all__ = [
    "MODEL_KINDS",
    "LabeledDataset",
    "TrainedModel",
    "MlpConfig",
    "predict",
    "knn_train",
    "knn_predict",
    "dtree_train",
    "dtree_predict",
    "rf_train",
    "rf_predict",
    "mlp_train",
    "mlp_predict",
    "mlp_predict_proba",
    "save_model",
    "load_model",
]
