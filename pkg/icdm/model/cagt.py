"""
Aggregation, generation and transformation over the student-centered graph.

Each relation is a bipartite chain between two node classes. Depth-k values
alternate along the chain: a student's depth-k Right view averages the
depth-(k-1) values of its right-pattern exercises, which in turn averaged
students at depth k-1. Views accumulate as sum_k h^k / (k + 1).
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from icdm.common.enums import NodeClass, Relation
from icdm.common.exceptions.exceptions import UsageException
from icdm.common.schemas import AggregationConfig
from icdm.diffcore import ops
from icdm.diffcore.optim import xavier_init
from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import Tensor2, constant
from icdm.graph.adjacency import Adjacency
from icdm.graph.scg import StudentCenteredGraph

EMBEDDINGS: Dict[NodeClass, str] = {
    NodeClass.STUDENT: "embedding.student",
    NodeClass.RIGHT: "embedding.right",
    NodeClass.WRONG: "embedding.wrong",
    NodeClass.CONCEPT: "embedding.concept",
}

VIEW_LAYOUT: Dict[NodeClass, Tuple[str, ...]] = {
    NodeClass.STUDENT: ("R->S", "W->S", "C->S"),
    NodeClass.RIGHT: ("S->R", "C->R"),
    NodeClass.WRONG: ("S->W", "C->W"),
    NodeClass.CONCEPT: ("R->C", "W->C", "S->C"),
}

TRANSFORM_ROLES = ("student", "exercise")


@dataclass(frozen=True)
class RelationChain:
    relation: Relation
    a_class: NodeClass
    b_class: NodeClass
    a_view: str
    b_view: str


CHAINS: Tuple[RelationChain, ...] = (
    RelationChain(Relation.RIGHT, NodeClass.STUDENT, NodeClass.RIGHT, "R->S", "S->R"),
    RelationChain(Relation.WRONG, NodeClass.STUDENT, NodeClass.WRONG, "W->S", "S->W"),
    RelationChain(Relation.DESIRED, NodeClass.STUDENT, NodeClass.CONCEPT, "C->S", "S->C"),
    RelationChain(Relation.RELATED, NodeClass.RIGHT, NodeClass.CONCEPT, "C->R", "R->C"),
    RelationChain(Relation.RELATED, NodeClass.WRONG, NodeClass.CONCEPT, "C->W", "W->C"),
)

STUDENT_RELATIONS = (Relation.RIGHT, Relation.WRONG, Relation.DESIRED)


def _empty_index() -> np.ndarray:
    return np.zeros(0, dtype=np.int64)


def positions(sorted_nodes: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Row of each id inside a sorted node array (ids must be present)."""
    return np.searchsorted(sorted_nodes, np.asarray(ids, dtype=np.int64))


@dataclass(frozen=True)
class NodeTargets:
    """Sorted unique node indices whose final representations are requested."""
    students: np.ndarray
    exercises: np.ndarray
    concepts: np.ndarray = field(default_factory=_empty_index)

    @classmethod
    def full(cls, g: StudentCenteredGraph) -> "NodeTargets":
        return cls(
            students=np.arange(g.n_students, dtype=np.int64),
            exercises=np.arange(g.n_exercises, dtype=np.int64),
            concepts=np.arange(g.n_concepts, dtype=np.int64),
        )

    def of(self, node_class: NodeClass) -> np.ndarray:
        if node_class is NodeClass.STUDENT:
            return self.students
        if node_class is NodeClass.CONCEPT:
            return self.concepts
        return self.exercises


@dataclass
class ViewBundle:
    """
    Accumulated views per node class, rows aligned with ``targets``.

    ``student_chain_depths`` holds, for full-graph passes, the exercise- or
    concept-side depth tables 0..K-1 of each student relation.
    """
    targets: NodeTargets
    views: Dict[NodeClass, List[Tensor2]]
    student_chain_depths: Dict[Relation, List[np.ndarray]] = field(default_factory=dict)


# --- Parameters ---

def init_parameters(
        store: ParameterStore,
        n_students: int,
        n_exercises: int,
        n_concepts: int,
        d: int,
        rng: np.random.Generator,
        transform: bool = True,
) -> None:
    """Register embeddings, generation and transformation parameters (Xavier init, zero biases)."""
    sizes = {
        NodeClass.STUDENT: n_students,
        NodeClass.RIGHT: n_exercises,
        NodeClass.WRONG: n_exercises,
        NodeClass.CONCEPT: n_concepts,
    }
    for node_class, name in EMBEDDINGS.items():
        store.register(name, xavier_init((sizes[node_class], d), rng).value)

    for node_class in VIEW_LAYOUT:
        prefix = f"generation.{node_class.value}"
        store.register(f"{prefix}.weight", xavier_init((d, d), rng).value)
        store.register(f"{prefix}.bias", np.zeros((1, d)))
        store.register(f"{prefix}.attention", xavier_init((d, 1), rng).value)

    if transform:
        for role in TRANSFORM_ROLES:
            store.register(f"transform.{role}.weight", xavier_init((d, n_concepts), rng).value)
            store.register(f"transform.{role}.bias", np.zeros((1, n_concepts)))


# --- Aggregation ---

def mean_step(
        adj: Adjacency,
        nodes: np.ndarray,
        previous: Tensor2,
        previous_nodes: np.ndarray,
        drop_rate: float = 0.0,
        rng: Optional[np.random.Generator] = None,
) -> Tensor2:
    """
    One depth of mean aggregation for ``nodes`` over ``previous`` values.

    Edges are dropped independently with probability ``drop_rate``; the mean
    runs over survivors and is zero when none remain.
    """
    segments, neighbor_ids = adj.expand(nodes)
    if drop_rate > 0.0:
        keep = rng.random(len(neighbor_ids)) >= drop_rate
        segments, neighbor_ids = segments[keep], neighbor_ids[keep]
    gathered = ops.row_gather(previous, positions(previous_nodes, neighbor_ids))
    return ops.segment_mean(gathered, segments, len(nodes))


def _propagate(
        chain: RelationChain,
        g: StudentCenteredGraph,
        store: ParameterStore,
        cfg: AggregationConfig,
        targets: NodeTargets,
        rng: Optional[np.random.Generator],
        keep_depths: bool,
) -> Tuple[Tensor2, Tensor2, List[np.ndarray]]:
    adj_ab = g.adj(chain.a_class, chain.relation)
    adj_ba = g.adj(chain.b_class, chain.relation)
    depth = cfg.k
    targets_a, targets_b = targets.of(chain.a_class), targets.of(chain.b_class)

    # Nodes whose depth-k value is needed, working back from the targets.
    need_a: List[np.ndarray] = [targets_a] * (depth + 1)
    need_b: List[np.ndarray] = [targets_b] * (depth + 1)
    for k in range(depth - 1, -1, -1):
        need_a[k] = np.union1d(targets_a, adj_ba.neighbor_union(need_b[k + 1]))
        need_b[k] = np.union1d(targets_b, adj_ab.neighbor_union(need_a[k + 1]))

    h_a = ops.row_gather(store[EMBEDDINGS[chain.a_class]], need_a[0])
    h_b = ops.row_gather(store[EMBEDDINGS[chain.b_class]], need_b[0])
    acc_a = ops.row_gather(h_a, positions(need_a[0], targets_a))
    acc_b = ops.row_gather(h_b, positions(need_b[0], targets_b))
    depths_b = [h_b.value] if keep_depths else []

    for k in range(1, depth + 1):
        rate = cfg.drop_rate(k - 1) if cfg.training_mode else 0.0
        next_a = mean_step(adj_ab, need_a[k], h_b, need_b[k - 1], rate, rng)
        next_b = mean_step(adj_ba, need_b[k], h_a, need_a[k - 1], rate, rng)
        weight = 1.0 / (k + 1)
        acc_a = ops.add(acc_a, ops.scale(ops.row_gather(next_a, positions(need_a[k], targets_a)), weight))
        acc_b = ops.add(acc_b, ops.scale(ops.row_gather(next_b, positions(need_b[k], targets_b)), weight))
        h_a, h_b = next_a, next_b
        if keep_depths and k < depth:
            depths_b.append(h_b.value)

    return acc_a, acc_b, depths_b


def aggregate(
        g: StudentCenteredGraph,
        store: ParameterStore,
        cfg: AggregationConfig,
        targets: Optional[NodeTargets] = None,
        rng: Optional[np.random.Generator] = None,
        keep_depths: bool = False,
) -> ViewBundle:
    """
    Accumulated per-relation views for the requested nodes.

    Only nodes within K hops of ``targets`` are touched; ``targets=None``
    means every node of the graph.
    """
    if cfg.training_mode and rng is None:
        raise UsageException("aggregate: training mode needs a random generator for dropout")
    targets = targets or NodeTargets.full(g)
    slots: Dict[NodeClass, Dict[str, Tensor2]] = {node_class: {} for node_class in VIEW_LAYOUT}
    depths: Dict[Relation, List[np.ndarray]] = {}

    for chain in CHAINS:
        if not g.has_relation(chain.a_class, chain.relation):
            continue
        view_a, view_b, depths_b = _propagate(chain, g, store, cfg, targets, rng, keep_depths)
        slots[chain.a_class][chain.a_view] = view_a
        slots[chain.b_class][chain.b_view] = view_b
        if keep_depths and chain.a_class is NodeClass.STUDENT:
            depths[chain.relation] = depths_b

    views = {
        node_class: [slots[node_class][label] for label in VIEW_LAYOUT[node_class] if label in slots[node_class]]
        for node_class in VIEW_LAYOUT
    }
    return ViewBundle(targets=targets, views=views, student_chain_depths=depths)


def aggregate_unseen(
        adjacency: Dict[Relation, Adjacency],
        chain_depths: Dict[Relation, List[np.ndarray]],
        cfg: AggregationConfig,
) -> List[Tensor2]:
    """
    Student views for students outside the trained graph.

    Their self term h^0 is zero; deeper terms average the frozen depth tables
    of the exercises and concepts they touched.
    """
    views: List[Tensor2] = []
    for relation in STUDENT_RELATIONS:
        if relation not in chain_depths:
            continue
        adj, tables = adjacency[relation], chain_depths[relation]
        nodes = np.arange(adj.n_sources, dtype=np.int64)
        acc = constant(np.zeros((adj.n_sources, tables[0].shape[1])))
        for k in range(1, cfg.k + 1):
            frozen = constant(tables[k - 1])
            step = mean_step(adj, nodes, frozen, np.arange(frozen.shape[0], dtype=np.int64))
            acc = ops.add(acc, ops.scale(step, 1.0 / (k + 1)))
        views.append(acc)
    return views


# --- Generation ---

def attention_scores(views: List[Tensor2], store: ParameterStore, node_class: NodeClass) -> List[Tensor2]:
    prefix = f"generation.{node_class.value}"
    weight, bias, attention = store[f"{prefix}.weight"], store[f"{prefix}.bias"], store[f"{prefix}.attention"]
    return [ops.matmul(ops.tanh(ops.add(ops.matmul(view, weight), bias)), attention) for view in views]


def generate_class(views: List[Tensor2], store: ParameterStore, node_class: NodeClass) -> Tensor2:
    """Attention-weighted fusion of one class's views."""
    weights = ops.softmax_over_fixed_arity(attention_scores(views, store, node_class))
    fused = ops.hadamard(views[0], ops.column(weights, 0))
    for index in range(1, len(views)):
        fused = ops.add(fused, ops.hadamard(views[index], ops.column(weights, index)))
    return fused


def generation_weights(views: List[Tensor2], store: ParameterStore, node_class: NodeClass) -> np.ndarray:
    return ops.softmax_over_fixed_arity(attention_scores(views, store, node_class)).value


def generate(bundle: ViewBundle, store: ParameterStore) -> Dict[NodeClass, Tensor2]:
    return {node_class: generate_class(views, store, node_class) for node_class, views in bundle.views.items()}


# --- Transformation ---

def project(x: Tensor2, store: ParameterStore, role: str) -> Tensor2:
    """Affine d -> Z map of a class; identity when transforms are disabled."""
    name = f"transform.{role}.weight"
    if name not in store:
        return x
    return ops.add(ops.matmul(x, store[name]), store[f"transform.{role}.bias"])


def exercise_latent(h_r: Tensor2, h_w: Tensor2) -> Tensor2:
    return ops.hadamard(h_r, h_w)


def transform(h_s: Tensor2, h_r: Tensor2, h_w: Tensor2, store: ParameterStore) -> Tuple[Tensor2, Tensor2]:
    """
    Width-Z (student, exercise) representations.

    Concept latents stay at width d; GLIF reads them through Con.
    """
    return project(h_s, store, "student"), project(exercise_latent(h_r, h_w), store, "exercise")


def project_per_concept(x: Tensor2, concepts: Tensor2, store: ParameterStore, role: str) -> Tensor2:
    """
    Width-Z rows whose column z is ``project(x * concepts[z], role)[:, z]``.

    ``concepts`` holds one width-d row per concept, in concept order.
    """
    context = constant(concepts.value.T)
    name = f"transform.{role}.weight"
    if name not in store:
        return ops.matmul(x, ops.hadamard(constant(np.eye(context.shape[0])), context))
    return ops.add(ops.matmul(x, ops.hadamard(store[name], context)), store[f"transform.{role}.bias"])
