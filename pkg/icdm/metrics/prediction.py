"""
Score-prediction metrics over probabilities and binary labels.
"""
from typing import Tuple

import numpy as np
from sklearn.metrics import accuracy_score, mean_squared_error, roc_auc_score

from icdm.common.exceptions.exceptions import DataValidationException, MetricUndefinedException

THRESHOLD = 0.5


def _aligned(preds, labels) -> Tuple[np.ndarray, np.ndarray]:
    preds = np.asarray(preds, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if len(preds) != len(labels):
        raise DataValidationException(
            "Predictions and labels differ in length",
            details={"preds": len(preds), "labels": len(labels)},
        )
    if len(preds) == 0:
        raise DataValidationException("Metrics need at least one prediction")
    return preds, labels


def auc(preds, labels) -> float:
    """
    Area under the ROC curve; ties between a positive and a negative count 1/2.

    Raises:
        MetricUndefinedException: If only one class is present.
    """
    preds, labels = _aligned(preds, labels)
    if len(np.unique(labels)) < 2:
        raise MetricUndefinedException(
            "AUC needs both positive and negative labels",
            details={"labels": sorted(int(value) for value in np.unique(labels))},
        )
    return float(roc_auc_score(labels, preds))


def acc(preds, labels) -> float:
    preds, labels = _aligned(preds, labels)
    return float(accuracy_score(labels, (preds >= THRESHOLD).astype(np.int64)))


def rmse(preds, labels) -> float:
    preds, labels = _aligned(preds, labels)
    return float(np.sqrt(mean_squared_error(labels.astype(np.float64), preds)))
