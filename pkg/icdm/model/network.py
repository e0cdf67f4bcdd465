from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import special

from icdm.common.enums import NodeClass, Relation
from icdm.common.exceptions.exceptions import ConfigException
from icdm.common.schemas import TrainConfig
from icdm.core.config import get_settings
from icdm.data.dataset import Dataset
from icdm.diffcore import ops
from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import Tensor2
from icdm.graph.bipartite import BipartiteGraph
from icdm.graph.scg import StudentCenteredGraph, build_involvement, build_scg
from icdm.model import cagt
from icdm.model.interaction import (
    InteractionFunction,
    concept_average,
    create_interaction,
    glif_lift,
    propagate_exercises,
    propagate_students,
)
from icdm.model.objective import loss as objective_loss

settings = get_settings()


@dataclass
class Encoding:
    """Width-d latents for a set of target nodes (exercise rows are h_r * h_w)."""
    targets: cagt.NodeTargets
    student: Tensor2
    right: Tensor2
    wrong: Tensor2
    exercise: Tensor2
    concept: Tensor2


@dataclass
class FrozenRepresentations:
    """
    Everything inductive inference reads from a trained model.

    ``chain_depths`` maps each student relation to the depth tables 0..K-1 of
    its exercise or concept side. ``exercise_context`` is the width-Z Diff
    for MIRT/MONO_MLP and the propagated width-d exercise row for GLIF;
    ``concept_latent`` holds the width-d concept rows GLIF profiles read.
    """
    chain_depths: Dict[Relation, List[np.ndarray]]
    exercise_latent: np.ndarray
    exercise_context: np.ndarray
    concept_average: Optional[np.ndarray]
    concept_latent: Optional[np.ndarray]
    exercise_degrees: np.ndarray


class ICDMModel:
    """
    CAGT representations scored by an interaction function.

    The graphs are built from the training dataset only; ``store`` holds every
    trainable tensor.
    """

    def __init__(
            self,
            dataset: Dataset,
            config: TrainConfig,
            store: ParameterStore,
            interaction: InteractionFunction,
    ):
        self.dataset = dataset
        self.config = config
        self.store = store
        self.interaction = interaction
        self.q_matrix = dataset.q_matrix.astype(np.float64)
        self.graph, self.bipartite = self.build_graphs(dataset, config)

    # --- Construction ---

    @staticmethod
    def build_graphs(dataset: Dataset, config: TrainConfig) -> Tuple[StudentCenteredGraph, BipartiteGraph]:
        ratings = dataset.rating_matrix()
        q = dataset.q_sparse()
        graph = build_scg(ratings, q, build_involvement(ratings, q), desired_edges=config.desired_edges)
        return graph, BipartiteGraph.from_ratings(ratings)

    @classmethod
    def initialize(cls, dataset: Dataset, config: TrainConfig, seed: Optional[int] = None) -> ICDMModel:
        """
        Fresh Xavier-initialised model for ``dataset``.

        Raises:
            ConfigException: If transforms are disabled while d differs from the concept count.
        """
        if not config.transform and config.d != dataset.n_concepts:
            raise ConfigException(
                "transform = false requires d to equal the number of concepts",
                details={"d": config.d, "concepts": dataset.n_concepts},
            )
        rng = np.random.default_rng(config.seed if seed is None else seed)
        store = ParameterStore()
        cagt.init_parameters(
            store,
            dataset.n_students,
            dataset.n_exercises,
            dataset.n_concepts,
            config.d,
            rng,
            transform=config.transform,
        )
        interaction = create_interaction(config.if_kind, dataset.n_concepts, config.hidden_dims)
        interaction.init_parameters(store, rng)
        return cls(dataset, config, store, interaction)

    @classmethod
    def from_state(cls, dataset: Dataset, config: TrainConfig, state: Dict[str, np.ndarray]) -> ICDMModel:
        interaction = create_interaction(config.if_kind, dataset.n_concepts, config.hidden_dims)
        return cls(dataset, config, ParameterStore.from_state_dict(state), interaction)

    @property
    def uses_global_context(self) -> bool:
        return self.interaction.uses_global_context

    @property
    def related(self):
        return self.graph.adj(NodeClass.RIGHT, Relation.RELATED)

    # --- Forward ---

    def targets_for(self, students: np.ndarray, exercises: np.ndarray) -> cagt.NodeTargets:
        """Nodes whose final latents a batch of (student, exercise) pairs reads."""
        batch_students = np.unique(students)
        batch_exercises = np.unique(exercises)
        if not self.uses_global_context:
            return cagt.NodeTargets(students=batch_students, exercises=batch_exercises)
        return cagt.NodeTargets(
            students=np.union1d(batch_students, self.bipartite.exercise_adj.neighbor_union(batch_exercises)),
            exercises=np.union1d(batch_exercises, self.bipartite.student_adj.neighbor_union(batch_students)),
            concepts=self.related.neighbor_union(batch_exercises),
        )

    def encode(
            self,
            targets: Optional[cagt.NodeTargets] = None,
            training: bool = False,
            rng: Optional[np.random.Generator] = None,
    ) -> Encoding:
        bundle = cagt.aggregate(self.graph, self.store, self.config.aggregation(training), targets, rng)
        latents = cagt.generate(bundle, self.store)
        return Encoding(
            targets=bundle.targets,
            student=latents[NodeClass.STUDENT],
            right=latents[NodeClass.RIGHT],
            wrong=latents[NodeClass.WRONG],
            exercise=cagt.exercise_latent(latents[NodeClass.RIGHT], latents[NodeClass.WRONG]),
            concept=latents[NodeClass.CONCEPT],
        )

    def score_pairs(self, encoding: Encoding, students: np.ndarray, exercises: np.ndarray) -> Tensor2:
        """Probabilities (B, 1) for aligned student/exercise index arrays."""
        targets = encoding.targets
        q_mask = self.q_matrix[exercises]
        if not self.uses_global_context:
            exercise_rows = cagt.positions(targets.exercises, exercises)
            mas, diff = cagt.transform(
                ops.row_gather(encoding.student, cagt.positions(targets.students, students)),
                ops.row_gather(encoding.right, exercise_rows),
                ops.row_gather(encoding.wrong, exercise_rows),
                self.store,
            )
            return self.interaction.forward(self.store, mas, diff, q_mask)

        batch_students, student_index = np.unique(students, return_inverse=True)
        batch_exercises, exercise_index = np.unique(exercises, return_inverse=True)
        lift = glif_lift(
            self.bipartite,
            self.related,
            encoding.student,
            targets.students,
            encoding.exercise,
            targets.exercises,
            encoding.concept,
            targets.concepts,
            batch_students,
            batch_exercises,
        )
        con = ops.row_gather(lift.con, exercise_index.reshape(-1))
        mas = cagt.project(ops.hadamard(ops.row_gather(lift.mas, student_index.reshape(-1)), con),
                           self.store, "student")
        diff = cagt.project(ops.hadamard(ops.row_gather(lift.diff, exercise_index.reshape(-1)), con),
                            self.store, "exercise")
        return self.interaction.forward(self.store, mas, diff, q_mask)

    def forward(
            self,
            students: np.ndarray,
            exercises: np.ndarray,
            training: bool = False,
            rng: Optional[np.random.Generator] = None,
    ) -> Tensor2:
        """Batch forward touching only the K-hop neighbourhood of the batch."""
        encoding = self.encode(self.targets_for(students, exercises), training, rng)
        return self.score_pairs(encoding, students, exercises)

    def batch_loss(
            self,
            students: np.ndarray,
            exercises: np.ndarray,
            scores: np.ndarray,
            lambda_reg: float,
            training: bool = False,
            rng: Optional[np.random.Generator] = None,
    ) -> Tensor2:
        preds = self.forward(students, exercises, training, rng)
        return objective_loss(scores, preds, self.store, lambda_reg, self.graph.n_students, self.graph.n_exercises)

    # --- Inference over the trained graph ---

    def predict(self, students: np.ndarray, exercises: np.ndarray, chunk_size: Optional[int] = None) -> np.ndarray:
        """Probabilities for trained students, dropout off, one full-graph encoding."""
        students = np.asarray(students, dtype=np.int64)
        exercises = np.asarray(exercises, dtype=np.int64)
        if len(students) == 0:
            return np.zeros(0)
        chunk_size = chunk_size or settings.PREDICT_CHUNK_SIZE
        encoding = self.encode()
        parts = [
            self.score_pairs(encoding, students[start:start + chunk_size], exercises[start:start + chunk_size]).value
            for start in range(0, len(students), chunk_size)
        ]
        return np.vstack(parts).reshape(-1)

    def mastery_logits(self) -> Tensor2:
        """
        Width-Z Mas rows of every trained student.

        For GLIF, column z is the student row under concept z's own context,
        the Con an exercise tagged only with z would apply.
        """
        encoding = self.encode()
        students = encoding.targets.students
        if not self.uses_global_context:
            return cagt.project(encoding.student, self.store, "student")
        propagated = propagate_students(
            self.bipartite, students, encoding.student, students, encoding.exercise, encoding.targets.exercises
        )
        return cagt.project_per_concept(propagated, encoding.concept, self.store, "student")

    def mastery_profile(self) -> np.ndarray:
        return special.expit(self.mastery_logits().value)

    def freeze(self) -> FrozenRepresentations:
        """Full-graph pass with dropout off, keeping what unseen students need."""
        targets = cagt.NodeTargets.full(self.graph)
        bundle = cagt.aggregate(self.graph, self.store, self.config.aggregation(False), targets, keep_depths=True)
        latents = cagt.generate(bundle, self.store)
        exercise = cagt.exercise_latent(latents[NodeClass.RIGHT], latents[NodeClass.WRONG])

        if self.uses_global_context:
            context = propagate_exercises(
                self.bipartite,
                targets.exercises,
                exercise,
                targets.exercises,
                latents[NodeClass.STUDENT],
                targets.students,
            ).value
            con = concept_average(self.related, targets.exercises, latents[NodeClass.CONCEPT], targets.concepts).value
            concepts = latents[NodeClass.CONCEPT].value
        else:
            _, diff = cagt.transform(latents[NodeClass.STUDENT], latents[NodeClass.RIGHT], latents[NodeClass.WRONG],
                                     self.store)
            context = diff.value
            con = concepts = None

        return FrozenRepresentations(
            chain_depths=bundle.student_chain_depths,
            exercise_latent=exercise.value,
            exercise_context=context,
            concept_average=con,
            concept_latent=concepts,
            exercise_degrees=self.bipartite.exercise_degrees.copy(),
        )
