from icdm.metrics.diagnosis import doa, doa_at_10, inconsistency, oracle_doa, top_concepts
from icdm.metrics.prediction import acc, auc, rmse

__all__ = [
    "acc",
    "auc",
    "doa",
    "doa_at_10",
    "inconsistency",
    "oracle_doa",
    "rmse",
    "top_concepts",
]
