from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class DatasetStats(BaseModel):
    """Summary statistics reported by `icdm stats`."""
    students: int
    exercises: int
    concepts: int
    logs: int
    sparsity: float = Field(..., ge=0.0, le=1.0)
    avg_correct_rate: float = Field(..., ge=0.0, le=1.0)
    q_density: float = Field(..., ge=0.0)


class EpochRecord(BaseModel):
    """One line of training progress."""
    epoch: int
    train_loss: float
    valid_auc: Optional[float] = None
    valid_acc: Optional[float] = None
    valid_rmse: Optional[float] = None


class EvalReport(BaseModel):
    """Prediction and diagnosis quality on a held-out log set."""
    auc: float = Field(..., ge=0.0, le=1.0)
    acc: float = Field(..., ge=0.0, le=1.0)
    rmse: float = Field(..., ge=0.0)
    doa: Optional[float] = Field(None, ge=0.0, le=1.0)
    doa_at_10: Optional[float] = Field(None, ge=0.0, le=1.0)
    inconsistency: Optional[float] = Field(None, ge=0.0)
    oracle_doa: Optional[float] = Field(None, ge=0.0, le=1.0)
    n_predictions: int
    acc_unseen: Optional[float] = Field(None, ge=0.0, le=1.0)
    n_unseen: int = 0


class SweepPoint(BaseModel):
    n_students: int
    n_logs: int
    median_ms: float


class BenchReport(BaseModel):
    """Inductive inference timing, optionally contrasted with retraining."""
    repeats: int
    n_students: int
    n_logs: int
    samples_ms: List[float]
    median_ms: float
    p95_ms: float
    sweep: Optional[List[SweepPoint]] = None
    per_log_ratio: Optional[float] = None
    retrain_seconds: Optional[float] = None


class SplitReport(BaseModel):
    mode: str
    files: List[str]
    logs: List[int]
    unseen_students: Optional[int] = None


class TrainReport(BaseModel):
    """Outcome of `icdm train`."""
    snapshot: str
    sha256: str
    best_epoch: int
    best_valid_auc: Optional[float] = None
    epochs_run: int
    history: List[EpochRecord]


class InferReport(BaseModel):
    students: int
    logs: int
    mastery_file: str
    predictions_file: Optional[str] = None
    n_predictions: int = 0


class GraphReport(BaseModel):
    """Edge counts written by `icdm dump-graph`."""
    students: int
    exercises: int
    concepts: int
    edges: Dict[str, int]
    files: List[str]
