from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from icdm.graph.adjacency import Adjacency
from icdm.graph.scg import as_binary


@dataclass(frozen=True)
class BipartiteGraph:
    """
    Student-exercise interactions regardless of score.

    ``exercise_adj`` is absent for graphs built over unseen students, whose
    exercise-side degrees come frozen from training.
    """
    student_adj: Adjacency
    exercise_adj: Optional[Adjacency]
    exercise_degrees: np.ndarray

    @property
    def student_degrees(self) -> np.ndarray:
        return self.student_adj.degrees

    @classmethod
    def from_ratings(cls, R: sparse.csr_array) -> BipartiteGraph:
        student_adj = Adjacency(as_binary(R))
        exercise_adj = student_adj.transpose()
        return cls(student_adj=student_adj, exercise_adj=exercise_adj, exercise_degrees=exercise_adj.degrees)

    @classmethod
    def for_unseen(cls, R_new: sparse.csr_array, trained_exercise_degrees: np.ndarray) -> BipartiteGraph:
        return cls(
            student_adj=Adjacency(as_binary(R_new)),
            exercise_adj=None,
            exercise_degrees=np.asarray(trained_exercise_degrees, dtype=np.int64),
        )

    def edge_weights(self, students: np.ndarray, exercises: np.ndarray) -> np.ndarray:
        """LightGCN normalization 1/sqrt(|N_s| |N_e|); zero degrees count as 1."""
        student_deg = np.maximum(self.student_degrees[students], 1)
        exercise_deg = np.maximum(self.exercise_degrees[exercises], 1)
        return 1.0 / np.sqrt(student_deg.astype(np.float64) * exercise_deg.astype(np.float64))
