from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import sparse

from icdm.common.enums import Relation
from icdm.common.exceptions.exceptions import DataValidationException, NoEvidenceException
from icdm.data.dataset import Dataset, rating_matrix
from icdm.graph.adjacency import Adjacency
from icdm.graph.scg import build_involvement
from icdm.repositories.dataset_repo import map_ids


@dataclass(frozen=True)
class NewStudentBatch:
    """
    Response logs of students outside the trained graph.

    ``students`` index into ``student_ids`` (raw, sorted); ``exercises`` are
    dense indices of the trained exercise space.
    """
    student_ids: np.ndarray
    students: np.ndarray
    exercises: np.ndarray
    scores: np.ndarray
    n_exercises: int

    @classmethod
    def from_logs(
            cls,
            logs: pd.DataFrame,
            train: Dataset,
            require: Optional[Iterable[int]] = None,
    ) -> NewStudentBatch:
        """
        Build a batch from raw-id logs against the trained id mapping.

        Raises:
            UnknownExerciseException: For an exercise id absent from training.
            DataValidationException: If a student id was seen in training or a pair repeats.
            NoEvidenceException: If a student in ``require`` has no logs, or the logs are empty.
        """
        raw_students = logs["student_id"].to_numpy(dtype=np.int64)
        exercises = map_ids(train.exercise_ids, logs["exercise_id"].to_numpy(dtype=np.int64))
        scores = logs["score"].to_numpy(dtype=np.int64)

        seen = np.isin(raw_students, train.student_ids)
        if seen.any():
            raise DataValidationException(
                "New-student logs reference a trained student",
                details={"student_id": int(raw_students[np.flatnonzero(seen)[0]])},
            )
        if pd.DataFrame({"s": raw_students, "e": exercises}).duplicated().any():
            raise DataValidationException("Duplicate (student, exercise) log in new-student batch")

        student_ids, students = np.unique(raw_students, return_inverse=True)
        present = set(student_ids.tolist())
        for student_id in ([] if require is None else require):
            if int(student_id) not in present:
                raise NoEvidenceException(int(student_id))
        if len(student_ids) == 0:
            raise NoEvidenceException(-1, message="No evidence: the batch holds no response logs")

        return cls(
            student_ids=student_ids,
            students=students.reshape(-1).astype(np.int64),
            exercises=exercises,
            scores=scores,
            n_exercises=train.n_exercises,
        )

    @property
    def n_students(self) -> int:
        return len(self.student_ids)

    @property
    def n_logs(self) -> int:
        return len(self.scores)

    def rating_matrix(self) -> sparse.csr_array:
        return rating_matrix(self.students, self.exercises, self.scores, self.n_students, self.n_exercises)

    def relation_adjacency(self, q_matrix, desired_edges: bool = True) -> Dict[Relation, Adjacency]:
        """Student-side Right, Wrong and (optionally) Desired neighbor sets."""
        right = self.scores == 1
        adjacency = {
            Relation.RIGHT: Adjacency.from_pairs(
                self.students[right], self.exercises[right], self.n_students, self.n_exercises
            ),
            Relation.WRONG: Adjacency.from_pairs(
                self.students[~right], self.exercises[~right], self.n_students, self.n_exercises
            ),
        }
        if desired_edges:
            adjacency[Relation.DESIRED] = Adjacency(build_involvement(self.rating_matrix(), sparse.csr_array(q_matrix)))
        return adjacency

    def unique_signatures(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Group students with identical (exercise, score) logs.

        Returns:
            (representatives, inverse): the first student of each group and,
            per student, the position of its group's representative.
        """
        ratings = self.rating_matrix()
        groups: Dict[Tuple[bytes, bytes], int] = {}
        representatives, inverse = [], np.zeros(self.n_students, dtype=np.int64)
        for student in range(self.n_students):
            start, end = ratings.indptr[student], ratings.indptr[student + 1]
            key = (ratings.indices[start:end].astype(np.int64).tobytes(), ratings.data[start:end].tobytes())
            if key not in groups:
                groups[key] = len(representatives)
                representatives.append(student)
            inverse[student] = groups[key]
        return np.asarray(representatives, dtype=np.int64), inverse

    def select(self, students: np.ndarray) -> NewStudentBatch:
        """Batch restricted to ``students`` (local indices), renumbered in the given order."""
        students = np.asarray(students, dtype=np.int64)
        remap = np.full(self.n_students, -1, dtype=np.int64)
        remap[students] = np.arange(len(students))
        keep = remap[self.students] >= 0
        return NewStudentBatch(
            student_ids=self.student_ids[students],
            students=remap[self.students[keep]],
            exercises=self.exercises[keep],
            scores=self.scores[keep],
            n_exercises=self.n_exercises,
        )

    def local_index(self, raw_student_ids) -> np.ndarray:
        """
        Raises:
            NoEvidenceException: For a requested student without logs in the batch.
        """
        raw = np.asarray(raw_student_ids, dtype=np.int64)
        positions = np.clip(np.searchsorted(self.student_ids, raw), 0, self.n_students - 1)
        missing = self.student_ids[positions] != raw
        if missing.any():
            raise NoEvidenceException(int(raw[np.flatnonzero(missing)[0]]))
        return positions
