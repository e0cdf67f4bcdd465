from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import special

from icdm.common.enums import NodeClass
from icdm.common.logger import get_logger
from icdm.data.new_students import NewStudentBatch
from icdm.diffcore import ops
from icdm.diffcore.tensor import Tensor2, constant
from icdm.graph.bipartite import BipartiteGraph
from icdm.model import cagt
from icdm.model.interaction import propagate_students
from icdm.model.snapshot import ModelSnapshot
from icdm.repositories.dataset_repo import map_ids

logger = get_logger()


@dataclass(frozen=True)
class MasteryProfile:
    """Per-student concept mastery in [0, 1]; rows follow ``student_ids``."""
    student_ids: np.ndarray
    concept_ids: np.ndarray
    mastery: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        n_students, n_concepts = self.mastery.shape
        return pd.DataFrame(
            {
                "student_id": np.repeat(self.student_ids, n_concepts),
                "concept_id": np.tile(self.concept_ids, n_students),
                "mastery": self.mastery.reshape(-1),
            },
            columns=["student_id", "concept_id", "mastery"],
        )


class InductiveService:
    """
    Diagnosis of unseen students from their logs with frozen parameters.

    Construction runs one full-graph pass; every later call only reads.
    """

    def __init__(self, snapshot: ModelSnapshot):
        self.snapshot = snapshot
        self.model = snapshot.build_model()
        self.frozen = self.model.freeze()
        self.aggregation = self.model.config.aggregation(False)

    # --- Representations ---

    def student_latent(self, batch: NewStudentBatch) -> Tensor2:
        """
        Width-d student rows for ``batch``, one per student.

        Students with identical logs share a single computed row.
        """
        representatives, inverse = batch.unique_signatures()
        unique = batch.select(representatives)
        adjacency = unique.relation_adjacency(self.model.q_matrix, self.model.config.desired_edges)
        views = cagt.aggregate_unseen(adjacency, self.frozen.chain_depths, self.aggregation)
        latent = cagt.generate_class(views, self.model.store, NodeClass.STUDENT)

        if self.model.uses_global_context:
            rows = np.arange(unique.n_students, dtype=np.int64)
            bipartite = BipartiteGraph.for_unseen(unique.rating_matrix(), self.frozen.exercise_degrees)
            latent = propagate_students(
                bipartite,
                rows,
                latent,
                rows,
                constant(self.frozen.exercise_latent),
                np.arange(self.frozen.exercise_latent.shape[0], dtype=np.int64),
            )
        return ops.row_gather(latent, inverse)

    def infer_mastery(self, batch: NewStudentBatch) -> MasteryProfile:
        latent, store = self.student_latent(batch), self.model.store
        if self.model.uses_global_context:
            logits = cagt.project_per_concept(latent, constant(self.frozen.concept_latent), store, "student")
        else:
            logits = cagt.project(latent, store, "student")
        mastery = special.expit(logits.value)
        logger.info("inductive_inference_completed", students=batch.n_students, logs=batch.n_logs)
        return MasteryProfile(
            student_ids=batch.student_ids,
            concept_ids=self.snapshot.train.concept_ids,
            mastery=mastery,
        )

    # --- Prediction ---

    def predict_new(self, batch: NewStudentBatch, student_ids, exercise_ids) -> np.ndarray:
        """
        Probabilities for (raw student id, raw exercise id) targets.

        Raises:
            NoEvidenceException: For a target student absent from ``batch``.
            UnknownExerciseException: For a target exercise absent from training.
        """
        students = batch.local_index(student_ids)
        exercises = map_ids(self.snapshot.train.exercise_ids, exercise_ids)
        if len(students) == 0:
            return np.zeros(0)

        store = self.model.store
        latent = ops.row_gather(self.student_latent(batch), students)
        q_mask = self.model.q_matrix[exercises]
        if self.model.uses_global_context:
            con = constant(self.frozen.concept_average[exercises])
            mas = cagt.project(ops.hadamard(latent, con), store, "student")
            diff = cagt.project(ops.hadamard(constant(self.frozen.exercise_context[exercises]), con), store, "exercise")
        else:
            mas = cagt.project(latent, store, "student")
            diff = constant(self.frozen.exercise_context[exercises])
        return self.model.interaction.forward(store, mas, diff, q_mask).value.reshape(-1)


def infer_mastery(snap: ModelSnapshot, batch: NewStudentBatch) -> MasteryProfile:
    return InductiveService(snap).infer_mastery(batch)


def predict_new(snap: ModelSnapshot, batch: NewStudentBatch, student_ids, exercise_ids) -> np.ndarray:
    return InductiveService(snap).predict_new(batch, student_ids, exercise_ids)
