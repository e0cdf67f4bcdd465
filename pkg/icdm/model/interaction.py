"""
Interaction functions: y = sigmoid(F((Mas - Diff) * q_mask)).
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar, Dict, List, Sequence, Type

import numpy as np

from icdm.common.enums import IFKind
from icdm.common.exceptions.exceptions import DataValidationException, UsageException
from icdm.diffcore import ops
from icdm.diffcore.optim import xavier_init
from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import Tensor2, constant
from icdm.graph.adjacency import Adjacency
from icdm.graph.bipartite import BipartiteGraph
from icdm.model.cagt import positions


class InteractionFunction(ABC):
    """Maps width-Z (Mas, Diff, q_mask) rows to correctness probabilities."""
    kind: ClassVar[IFKind]
    uses_global_context: ClassVar[bool] = False

    def __init__(self, n_concepts: int, hidden_dims: Sequence[int] = (512, 256)):
        self.n_concepts = n_concepts
        self.hidden_dims = list(hidden_dims)

    @abstractmethod
    def init_parameters(self, store: ParameterStore, rng: np.random.Generator) -> None:
        ...

    @abstractmethod
    def forward(self, store: ParameterStore, mas: Tensor2, diff: Tensor2, q_mask: np.ndarray) -> Tensor2:
        """Probabilities of shape (rows, 1)."""

    def clamp_nonneg(self, store: ParameterStore) -> None:
        for name in self.nonneg_parameters():
            store[name].value = np.maximum(store[name].value, 0.0)

    def nonneg_parameters(self) -> List[str]:
        return []

    @staticmethod
    def masked_difference(mas: Tensor2, diff: Tensor2, q_mask: np.ndarray) -> Tensor2:
        return ops.hadamard(ops.sub(mas, diff), constant(np.asarray(q_mask, dtype=np.float64)))

    def predict(self, store: ParameterStore, mas_row, diff_row, q_mask) -> float:
        """
        Probability for a single (Mas, Diff, q_mask) triple.

        Raises:
            DataValidationException: If q_mask has no nonzero entry.
        """
        q_row = np.asarray(q_mask, dtype=np.float64).reshape(1, -1)
        if not np.any(q_row):
            raise DataValidationException("q_mask must tag at least one concept")
        mas = constant(np.asarray(mas_row, dtype=np.float64).reshape(1, -1))
        diff = constant(np.asarray(diff_row, dtype=np.float64).reshape(1, -1))
        return self.forward(store, mas, diff, q_row).item()


class MirtInteraction(InteractionFunction):
    """Logistic reduction: sigmoid(masked_diff . discrimination + bias), discrimination >= 0."""
    kind = IFKind.MIRT

    def init_parameters(self, store: ParameterStore, rng: np.random.Generator) -> None:
        store.register("interaction.mirt.discrimination", np.ones((self.n_concepts, 1)))
        store.register("interaction.mirt.bias", np.zeros((1, 1)))

    def forward(self, store: ParameterStore, mas: Tensor2, diff: Tensor2, q_mask: np.ndarray) -> Tensor2:
        logits = ops.add(
            ops.matmul(self.masked_difference(mas, diff, q_mask), store["interaction.mirt.discrimination"]),
            store["interaction.mirt.bias"],
        )
        return ops.sigmoid(logits)

    def nonneg_parameters(self) -> List[str]:
        return ["interaction.mirt.discrimination"]


class MonotonicMlpInteraction(InteractionFunction):
    """Sigmoid MLP with non-negative weights over the masked difference."""
    kind = IFKind.MONO_MLP

    def layer_shapes(self):
        widths = [self.n_concepts] + self.hidden_dims + [1]
        return list(zip(widths[:-1], widths[1:]))

    def init_parameters(self, store: ParameterStore, rng: np.random.Generator) -> None:
        for index, shape in enumerate(self.layer_shapes()):
            store.register(f"interaction.mlp.{index}.weight", xavier_init(shape, rng).value)
            store.register(f"interaction.mlp.{index}.bias", np.zeros((1, shape[1])))
        self.clamp_nonneg(store)

    def forward(self, store: ParameterStore, mas: Tensor2, diff: Tensor2, q_mask: np.ndarray) -> Tensor2:
        hidden = self.masked_difference(mas, diff, q_mask)
        n_layers = len(self.layer_shapes())
        for index in range(n_layers):
            hidden = ops.add(
                ops.matmul(hidden, store[f"interaction.mlp.{index}.weight"]),
                store[f"interaction.mlp.{index}.bias"],
            )
            hidden = ops.sigmoid(hidden)
        return hidden

    def nonneg_parameters(self) -> List[str]:
        return [f"interaction.mlp.{index}.weight" for index in range(len(self.layer_shapes()))]


class GlobalLevelInteraction(MonotonicMlpInteraction):
    """Monotonic MLP scored on bipartite-propagated, concept-averaged representations."""
    kind = IFKind.GLIF
    uses_global_context = True


_INTERACTIONS: Dict[IFKind, Type[InteractionFunction]] = {
    IFKind.MIRT: MirtInteraction,
    IFKind.MONO_MLP: MonotonicMlpInteraction,
    IFKind.GLIF: GlobalLevelInteraction,
}


def create_interaction(kind: IFKind, n_concepts: int, hidden_dims: Sequence[int] = (512, 256)) -> InteractionFunction:
    try:
        interaction_cls = _INTERACTIONS[IFKind(kind)]
    except (KeyError, ValueError):
        raise UsageException(f"Unsupported interaction function: {kind}")
    return interaction_cls(n_concepts, hidden_dims)


# --- Global-level context ---

@dataclass
class GlifLift:
    """Width-d propagated rows: ``mas`` per student, ``diff`` and ``con`` per exercise."""
    mas: Tensor2
    diff: Tensor2
    con: Tensor2


def propagate_students(
        bipartite: BipartiteGraph,
        students: np.ndarray,
        student_latent: Tensor2,
        student_rows: np.ndarray,
        exercise_latent: Tensor2,
        exercise_rows: np.ndarray,
) -> Tensor2:
    """1/2 (h_s + sum_{e in N_s} h_e / sqrt(|N_s| |N_e|)) for each of ``students``."""
    segments, neighbor_ids = bipartite.student_adj.expand(students)
    weights = bipartite.edge_weights(students[segments], neighbor_ids)
    gathered = ops.row_gather(exercise_latent, positions(exercise_rows, neighbor_ids))
    context = ops.segment_sum(gathered, segments, len(students), weights)
    own = ops.row_gather(student_latent, positions(student_rows, students))
    return ops.scale(ops.add(own, context), 0.5)


def propagate_exercises(
        bipartite: BipartiteGraph,
        exercises: np.ndarray,
        exercise_latent: Tensor2,
        exercise_rows: np.ndarray,
        student_latent: Tensor2,
        student_rows: np.ndarray,
) -> Tensor2:
    """1/2 (h_e + sum_{s in N_e} h_s / sqrt(|N_s| |N_e|)) for each of ``exercises``."""
    segments, neighbor_ids = bipartite.exercise_adj.expand(exercises)
    weights = bipartite.edge_weights(neighbor_ids, exercises[segments])
    gathered = ops.row_gather(student_latent, positions(student_rows, neighbor_ids))
    context = ops.segment_sum(gathered, segments, len(exercises), weights)
    own = ops.row_gather(exercise_latent, positions(exercise_rows, exercises))
    return ops.scale(ops.add(own, context), 0.5)


def concept_average(
        related: Adjacency,
        exercises: np.ndarray,
        concept_latent: Tensor2,
        concept_rows: np.ndarray,
) -> Tensor2:
    """Con_e: mean concept latent over each exercise's Q row."""
    segments, concepts = related.expand(exercises)
    gathered = ops.row_gather(concept_latent, positions(concept_rows, concepts))
    return ops.segment_mean(gathered, segments, len(exercises))


def glif_lift(
        bipartite: BipartiteGraph,
        related: Adjacency,
        student_latent: Tensor2,
        student_rows: np.ndarray,
        exercise_latent: Tensor2,
        exercise_rows: np.ndarray,
        concept_latent: Tensor2,
        concept_rows: np.ndarray,
        students: np.ndarray,
        exercises: np.ndarray,
) -> GlifLift:
    """
    Global-level context for ``students`` and ``exercises``.

    ``*_rows`` give the node index of each latent row (sorted). The Hadamard
    with Con is left to the caller, which applies it per scored pair.
    """
    return GlifLift(
        mas=propagate_students(bipartite, students, student_latent, student_rows, exercise_latent, exercise_rows),
        diff=propagate_exercises(bipartite, exercises, exercise_latent, exercise_rows, student_latent, student_rows),
        con=concept_average(related, exercises, concept_latent, concept_rows),
    )
