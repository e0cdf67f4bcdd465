from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import sparse

from icdm.common.exceptions.exceptions import DataValidationException
from icdm.schemas.reports import DatasetStats

LOG_COLUMNS = ["student_id", "exercise_id", "score"]
Q_COLUMNS = ["exercise_id", "concept_id"]
TARGET_COLUMNS = ["student_id", "exercise_id"]
TRUTH_COLUMNS = ["student_id", "concept_id", "mastery"]


@dataclass(frozen=True)
class Dataset:
    """
    Response logs plus Q-matrix over dense 0-based indices.

    Logs are parallel index arrays; ``student_ids``, ``exercise_ids`` and
    ``concept_ids`` hold the raw id of every dense index.
    """
    students: np.ndarray
    exercises: np.ndarray
    scores: np.ndarray
    q_matrix: np.ndarray
    student_ids: np.ndarray
    exercise_ids: np.ndarray
    concept_ids: np.ndarray

    def __post_init__(self):
        for name in ("students", "exercises", "scores"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64).reshape(-1))
        object.__setattr__(self, "q_matrix", np.asarray(self.q_matrix, dtype=np.int8))
        for name in ("student_ids", "exercise_ids", "concept_ids"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64).reshape(-1))

        if not (len(self.students) == len(self.exercises) == len(self.scores)):
            raise DataValidationException("Log arrays have different lengths")
        if self.q_matrix.shape != (len(self.exercise_ids), len(self.concept_ids)):
            raise DataValidationException(
                "Q-matrix shape does not match exercise/concept counts",
                details={"q_shape": list(self.q_matrix.shape)},
            )

    # --- Sizes ---

    @property
    def n_students(self) -> int:
        return len(self.student_ids)

    @property
    def n_exercises(self) -> int:
        return len(self.exercise_ids)

    @property
    def n_concepts(self) -> int:
        return len(self.concept_ids)

    @property
    def n_logs(self) -> int:
        return len(self.scores)

    # --- Derived matrices ---

    def rating_matrix(self) -> sparse.csr_array:
        """Ternary N x M matrix: 1 right, -1 wrong, 0 unobserved."""
        return rating_matrix(self.students, self.exercises, self.scores, self.n_students, self.n_exercises)

    def q_sparse(self) -> sparse.csr_array:
        matrix = sparse.csr_array(self.q_matrix)
        matrix.sort_indices()
        return matrix

    def stats(self) -> DatasetStats:
        cells = self.n_students * self.n_exercises
        return DatasetStats(
            students=self.n_students,
            exercises=self.n_exercises,
            concepts=self.n_concepts,
            logs=self.n_logs,
            sparsity=self.n_logs / cells if cells else 0.0,
            avg_correct_rate=float(self.scores.mean()) if self.n_logs else 0.0,
            q_density=float(self.q_matrix.sum()) / self.n_exercises if self.n_exercises else 0.0,
        )

    # --- Derived datasets ---

    def subset(self, rows: np.ndarray) -> Dataset:
        """Keep the selected log rows; the index space is unchanged."""
        return Dataset(
            students=self.students[rows],
            exercises=self.exercises[rows],
            scores=self.scores[rows],
            q_matrix=self.q_matrix,
            student_ids=self.student_ids,
            exercise_ids=self.exercise_ids,
            concept_ids=self.concept_ids,
        )

    def compact_students(self) -> Dataset:
        """Drop students without logs and renumber the rest densely."""
        present, dense = np.unique(self.students, return_inverse=True)
        return Dataset(
            students=dense,
            exercises=self.exercises,
            scores=self.scores,
            q_matrix=self.q_matrix,
            student_ids=self.student_ids[present],
            exercise_ids=self.exercise_ids,
            concept_ids=self.concept_ids,
        )

    def align_students(self, reference: Dataset) -> Dataset:
        """Re-express logs in ``reference``'s student index, dropping unknown students."""
        raw = self.student_ids[self.students]
        positions = np.searchsorted(reference.student_ids, raw)
        positions = np.clip(positions, 0, max(reference.n_students - 1, 0))
        known = reference.n_students > 0
        keep = (reference.student_ids[positions] == raw) if known else np.zeros(len(raw), dtype=bool)
        return Dataset(
            students=positions[keep],
            exercises=self.exercises[keep],
            scores=self.scores[keep],
            q_matrix=self.q_matrix,
            student_ids=reference.student_ids,
            exercise_ids=self.exercise_ids,
            concept_ids=self.concept_ids,
        )

    def logs_frame(self) -> pd.DataFrame:
        """Logs with raw ids, in the CSV column layout."""
        return pd.DataFrame(
            {
                "student_id": self.student_ids[self.students],
                "exercise_id": self.exercise_ids[self.exercises],
                "score": self.scores,
            },
            columns=LOG_COLUMNS,
        )

    def q_frame(self) -> pd.DataFrame:
        rows, cols = np.nonzero(self.q_matrix)
        return pd.DataFrame(
            {"exercise_id": self.exercise_ids[rows], "concept_id": self.concept_ids[cols]},
            columns=Q_COLUMNS,
        )

    def concept_rows(self, exercises: Optional[np.ndarray] = None) -> np.ndarray:
        exercises = self.exercises if exercises is None else exercises
        return self.q_matrix[exercises]


def rating_matrix(
        students: np.ndarray,
        exercises: np.ndarray,
        scores: np.ndarray,
        n_students: int,
        n_exercises: int,
) -> sparse.csr_array:
    values = np.where(np.asarray(scores) == 1, 1, -1).astype(np.int8)
    matrix = sparse.csr_array(
        (values, (np.asarray(students, dtype=np.int64), np.asarray(exercises, dtype=np.int64))),
        shape=(n_students, n_exercises),
    )
    matrix.sort_indices()
    return matrix
