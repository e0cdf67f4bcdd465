import time
from typing import Callable, List, Optional

import numpy as np

from icdm.common.logger import get_logger
from icdm.data.dataset import Dataset
from icdm.data.new_students import NewStudentBatch
from icdm.model.snapshot import ModelSnapshot
from icdm.schemas.reports import BenchReport, SweepPoint
from icdm.services.inductive_service import InductiveService
from icdm.services.training_service import TrainingService

logger = get_logger()

SWEEP_FRACTIONS = (0.25, 0.5, 0.75, 1.0)


def time_ms(call: Callable[[], object], repeats: int) -> List[float]:
    """Wall-clock milliseconds of ``repeats`` calls after one untimed warm-up."""
    call()
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        call()
        samples.append((time.perf_counter() - start) * 1000.0)
    return samples


class BenchService:
    """Times inductive inference on a snapshot, optionally against retraining."""

    def __init__(self, snapshot: ModelSnapshot):
        self.snapshot = snapshot
        self.inductive = InductiveService(snapshot)

    def sweep(self, batch: NewStudentBatch, repeats: int) -> List[SweepPoint]:
        """Median latency over nested student prefixes of the batch."""
        points = []
        for fraction in SWEEP_FRACTIONS:
            count = max(1, int(np.ceil(fraction * batch.n_students)))
            sub_batch = batch.select(np.arange(count))
            samples = time_ms(lambda: self.inductive.infer_mastery(sub_batch), repeats)
            points.append(
                SweepPoint(n_students=sub_batch.n_students, n_logs=sub_batch.n_logs, median_ms=float(np.median(samples)))
            )
        return points

    def retrain_seconds(self, batch: NewStudentBatch, epochs: int) -> float:
        """Seconds to train from scratch on the snapshot's logs plus the batch's logs."""
        train = self.snapshot.train
        raw_students = np.concatenate([train.student_ids[train.students], batch.student_ids[batch.students]])
        student_ids, students = np.unique(raw_students, return_inverse=True)
        combined = Dataset(
            students=students.reshape(-1),
            exercises=np.concatenate([train.exercises, batch.exercises]),
            scores=np.concatenate([train.scores, batch.scores]),
            q_matrix=train.q_matrix,
            student_ids=student_ids,
            exercise_ids=train.exercise_ids,
            concept_ids=train.concept_ids,
        )
        config = self.snapshot.config.model_copy(update={"epochs": epochs})
        start = time.perf_counter()
        TrainingService(config).train(combined)
        return time.perf_counter() - start

    def run(
            self,
            batch: NewStudentBatch,
            repeats: int = 5,
            sweep: bool = False,
            retrain_epochs: Optional[int] = None,
    ) -> BenchReport:
        samples = time_ms(lambda: self.inductive.infer_mastery(batch), repeats)
        report = {
            "repeats": repeats,
            "n_students": batch.n_students,
            "n_logs": batch.n_logs,
            "samples_ms": samples,
            "median_ms": float(np.median(samples)),
            "p95_ms": float(np.percentile(samples, 95)),
        }
        if sweep:
            points = self.sweep(batch, repeats)
            first, last = points[0], points[-1]
            report["sweep"] = points
            report["per_log_ratio"] = (last.median_ms / max(last.n_logs, 1)) / max(
                first.median_ms / max(first.n_logs, 1), 1e-12
            )
        if retrain_epochs:
            report["retrain_seconds"] = self.retrain_seconds(batch, retrain_epochs)

        result = BenchReport(**report)
        logger.info("bench_completed", median_ms=result.median_ms, p95_ms=result.p95_ms, n_logs=result.n_logs)
        return result
