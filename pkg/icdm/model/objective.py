import numpy as np

from icdm.diffcore import ops
from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import Tensor2


def regularizer(store: ParameterStore, n_observed_students: int, n_exercises: int) -> Tensor2:
    """Squared entries of every embedding table, summed and divided by the student plus exercise count."""
    tables = store.embedding_tables()
    total = ops.sq_norm(tables[0])
    for table in tables[1:]:
        total = ops.add(total, ops.sq_norm(table))
    return ops.scale(total, 1.0 / max(n_observed_students + n_exercises, 1))


def loss(
        labels: np.ndarray,
        preds: Tensor2,
        store: ParameterStore,
        lambda_reg: float,
        n_observed_students: int,
        n_exercises: int,
) -> Tensor2:
    """Summed BCE over the batch plus the weighted embedding penalty."""
    bce = ops.bce_loss(preds, labels)
    if lambda_reg == 0.0:
        return bce
    return ops.add(bce, ops.scale(regularizer(store, n_observed_students, n_exercises), lambda_reg))
