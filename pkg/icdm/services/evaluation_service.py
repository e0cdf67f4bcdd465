from typing import Optional, Tuple

import numpy as np
import pandas as pd

from icdm.common.exceptions.exceptions import DataValidationException, MetricUndefinedException
from icdm.common.logger import get_logger
from icdm.data.dataset import rating_matrix
from icdm.data.new_students import NewStudentBatch
from icdm.metrics.diagnosis import doa, doa_at_10, inconsistency, oracle_doa
from icdm.metrics.prediction import acc, auc, rmse
from icdm.model.snapshot import ModelSnapshot
from icdm.repositories.dataset_repo import map_ids
from icdm.schemas.reports import EvalReport
from icdm.services.inductive_service import InductiveService

logger = get_logger()


class EvaluationService:
    """
    Scores a snapshot on held-out logs.

    Test rows of trained students are predicted transductively; rows of any
    other student are predicted inductively from ``evidence`` logs.
    """

    def __init__(self, snapshot: ModelSnapshot):
        self.snapshot = snapshot
        self.inductive = InductiveService(snapshot)
        self.model = self.inductive.model

    def evaluate(
            self,
            test: pd.DataFrame,
            evidence: Optional[pd.DataFrame] = None,
            with_doa: bool = False,
            with_inconsistency: bool = False,
            truth: Optional[pd.DataFrame] = None,
    ) -> EvalReport:
        """
        Raises:
            NoEvidenceException: If an unseen test student has no evidence logs.
            DataValidationException: If ``truth`` lacks a diagnosed student.
        """
        train = self.snapshot.train
        raw_students = test["student_id"].to_numpy(dtype=np.int64)
        raw_exercises = test["exercise_id"].to_numpy(dtype=np.int64)
        labels = test["score"].to_numpy(dtype=np.int64)
        exercises = map_ids(train.exercise_ids, raw_exercises)

        trained = np.isin(raw_students, train.student_ids)
        unseen = ~trained
        preds = np.zeros(len(labels))
        if trained.any():
            students = np.searchsorted(train.student_ids, raw_students[trained])
            preds[trained] = self.model.predict(students, exercises[trained])

        batch = None
        if unseen.any() or evidence is not None:
            batch = NewStudentBatch.from_logs(
                evidence if evidence is not None else test.iloc[0:0],
                train,
                require=np.unique(raw_students[unseen]),
            )
        if unseen.any():
            preds[unseen] = self.inductive.predict_new(batch, raw_students[unseen], raw_exercises[unseen])

        report = {
            "auc": auc(preds, labels),
            "acc": acc(preds, labels),
            "rmse": rmse(preds, labels),
            "n_predictions": int(len(labels)),
            "n_unseen": int(unseen.sum()),
            "acc_unseen": acc(preds[unseen], labels[unseen]) if unseen.any() else None,
        }
        if with_doa or with_inconsistency:
            mas, logs, ratings = self._diagnosis_inputs(test, exercises, trained, batch)
            if with_doa:
                report["doa"] = self._optional(doa, mas, *logs, train.q_matrix)
                report["doa_at_10"] = self._optional(doa_at_10, mas, *logs, train.q_matrix)
            if with_inconsistency:
                report["inconsistency"] = self._optional(inconsistency, mas, ratings)
        if truth is not None:
            student_ids, mas = self._population(batch)
            report["oracle_doa"] = self._optional(oracle_doa, mas, self._truth_matrix(truth, student_ids))

        result = EvalReport(**report)
        logger.info("evaluation_completed", **result.model_dump())
        return result

    def _diagnosis_inputs(
            self,
            test: pd.DataFrame,
            exercises: np.ndarray,
            trained: np.ndarray,
            batch: Optional[NewStudentBatch],
    ) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray, np.ndarray], object]:
        """
        Mastery, (students, exercises, scores) logs and evidence ratings of the
        diagnosed population: new students when evidence is given, otherwise
        the trained students.
        """
        train = self.snapshot.train
        scores = test["score"].to_numpy(dtype=np.int64)
        if batch is not None:
            _, mas = self._population(batch)
            selected = ~trained
            students = batch.local_index(test["student_id"].to_numpy(dtype=np.int64)[selected])
            logs = (
                np.concatenate([students, batch.students]),
                np.concatenate([exercises[selected], batch.exercises]),
                np.concatenate([scores[selected], batch.scores]),
            )
            return mas, logs, batch.rating_matrix()

        _, mas = self._population(batch)
        students = np.searchsorted(train.student_ids, test["student_id"].to_numpy(dtype=np.int64)[trained])
        logs = (
            np.concatenate([students, train.students]),
            np.concatenate([exercises[trained], train.exercises]),
            np.concatenate([scores[trained], train.scores]),
        )
        ratings = rating_matrix(train.students, train.exercises, train.scores, train.n_students, train.n_exercises)
        return mas, logs, ratings

    def _population(self, batch: Optional[NewStudentBatch]) -> Tuple[np.ndarray, np.ndarray]:
        """Raw ids and mastery of the diagnosed students."""
        if batch is not None:
            return batch.student_ids, self.inductive.infer_mastery(batch).mastery
        return self.snapshot.train.student_ids, self.model.mastery_profile()

    def _truth_matrix(self, truth: pd.DataFrame, student_ids: np.ndarray) -> np.ndarray:
        concept_ids = self.snapshot.train.concept_ids
        table = truth.pivot_table(index="student_id", columns="concept_id", values="mastery", aggfunc="max")
        table = table.reindex(index=student_ids, columns=concept_ids)
        if table.isna().to_numpy().any():
            missing = int(table.index[table.isna().any(axis=1)][0])
            raise DataValidationException(
                "True mastery does not cover every diagnosed student and concept",
                details={"student_id": missing},
            )
        return table.to_numpy(dtype=np.int64)

    @staticmethod
    def _optional(metric, *args) -> Optional[float]:
        try:
            return metric(*args)
        except MetricUndefinedException as exc:
            logger.warning("metric_undefined", metric=metric.__name__, reason=exc.message)
            return None
