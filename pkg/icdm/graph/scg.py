"""
Student-centered graph: students, right-pattern exercises, wrong-pattern
exercises and concepts joined by Right, Wrong, Related and Desired edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, Tuple

import numpy as np
from scipy import sparse

from icdm.common.enums import NodeClass, Relation
from icdm.common.exceptions.exceptions import DataValidationException, UsageException
from icdm.graph.adjacency import Adjacency

# (source class, relation) -> target class. Concept-side Related edges point at
# exercise indices, shared by the right and wrong pattern nodes.
RELATION_TARGETS: Dict[Tuple[NodeClass, Relation], NodeClass] = {
    (NodeClass.STUDENT, Relation.RIGHT): NodeClass.RIGHT,
    (NodeClass.STUDENT, Relation.WRONG): NodeClass.WRONG,
    (NodeClass.STUDENT, Relation.DESIRED): NodeClass.CONCEPT,
    (NodeClass.RIGHT, Relation.RIGHT): NodeClass.STUDENT,
    (NodeClass.RIGHT, Relation.RELATED): NodeClass.CONCEPT,
    (NodeClass.WRONG, Relation.WRONG): NodeClass.STUDENT,
    (NodeClass.WRONG, Relation.RELATED): NodeClass.CONCEPT,
    (NodeClass.CONCEPT, Relation.RELATED): NodeClass.RIGHT,
    (NodeClass.CONCEPT, Relation.DESIRED): NodeClass.STUDENT,
}


def as_binary(matrix) -> sparse.csr_array:
    csr = sparse.csr_array(matrix)
    csr.eliminate_zeros()
    return sparse.csr_array((csr != 0).astype(np.int8))


def build_involvement(R: sparse.csr_array, Q) -> sparse.csr_array:
    """
    I[i, z] = 1 iff student i answered some exercise j with Q[j, z] = 1.

    Raises:
        DataValidationException: If R's columns do not match Q's rows.
    """
    if R.shape[1] != Q.shape[0]:
        raise DataValidationException(
            "Rating matrix columns must equal Q-matrix rows",
            details={"rating_shape": list(R.shape), "q_shape": list(Q.shape)},
        )
    touched = as_binary(R).astype(np.int64) @ as_binary(Q).astype(np.int64)
    involvement = as_binary(sparse.csr_array(touched))
    involvement.sort_indices()
    return involvement


@dataclass(frozen=True)
class StudentCenteredGraph:
    """Immutable heterogeneous graph; adjacency is stored in both directions."""
    n_students: int
    n_exercises: int
    n_concepts: int
    adjacency: Dict[Tuple[NodeClass, Relation], Adjacency]

    def size(self, node_class: NodeClass) -> int:
        if node_class is NodeClass.STUDENT:
            return self.n_students
        if node_class is NodeClass.CONCEPT:
            return self.n_concepts
        return self.n_exercises

    def adj(self, node_class: NodeClass, relation: Relation) -> Adjacency:
        try:
            return self.adjacency[(node_class, relation)]
        except KeyError:
            raise UsageException(
                f"Relation '{relation.value}' is not defined for node class '{node_class.value}'",
                details={"node_class": node_class.value, "relation": relation.value},
            )

    def has_relation(self, node_class: NodeClass, relation: Relation) -> bool:
        return (node_class, relation) in self.adjacency

    def edge_count(self, relation: Relation) -> int:
        """Undirected edge count of a relation (Related counts both exercise patterns)."""
        if relation is Relation.RELATED:
            return self.adjacency[(NodeClass.RIGHT, Relation.RELATED)].nnz * 2
        source = NodeClass.STUDENT
        return self.adjacency[(source, relation)].nnz if (source, relation) in self.adjacency else 0

    def edge_lists(self) -> Iterator[Tuple[str, NodeClass, NodeClass, np.ndarray, np.ndarray]]:
        """One direction of every relation, for debugging dumps."""
        for name, key in (
                ("right", (NodeClass.STUDENT, Relation.RIGHT)),
                ("wrong", (NodeClass.STUDENT, Relation.WRONG)),
                ("related_right", (NodeClass.RIGHT, Relation.RELATED)),
                ("related_wrong", (NodeClass.WRONG, Relation.RELATED)),
                ("desired", (NodeClass.STUDENT, Relation.DESIRED)),
        ):
            if key in self.adjacency:
                sources, targets = self.adjacency[key].pairs()
                yield name, key[0], RELATION_TARGETS[key], sources, targets


def build_scg(R_O: sparse.csr_array, Q, I_O: sparse.csr_array, desired_edges: bool = True) -> StudentCenteredGraph:
    """
    Build the student-centered graph from training ratings.

    Raises:
        DataValidationException: On inconsistent shapes.
    """
    n_students, n_exercises = R_O.shape
    if Q.shape[0] != n_exercises:
        raise DataValidationException(
            "Q-matrix rows must equal rating matrix columns",
            details={"rating_shape": list(R_O.shape), "q_shape": list(Q.shape)},
        )
    n_concepts = Q.shape[1]
    if I_O.shape != (n_students, n_concepts):
        raise DataValidationException(
            "Involvement matrix shape must be students x concepts",
            details={"involvement_shape": list(I_O.shape)},
        )

    ratings = sparse.csr_array(R_O).tocoo()
    students, exercises, values = ratings.row, ratings.col, ratings.data
    right = Adjacency.from_pairs(students[values > 0], exercises[values > 0], n_students, n_exercises)
    wrong = Adjacency.from_pairs(students[values < 0], exercises[values < 0], n_students, n_exercises)
    related = Adjacency(as_binary(Q))

    adjacency = {
        (NodeClass.STUDENT, Relation.RIGHT): right,
        (NodeClass.RIGHT, Relation.RIGHT): right.transpose(),
        (NodeClass.STUDENT, Relation.WRONG): wrong,
        (NodeClass.WRONG, Relation.WRONG): wrong.transpose(),
        (NodeClass.RIGHT, Relation.RELATED): related,
        (NodeClass.WRONG, Relation.RELATED): related,
        (NodeClass.CONCEPT, Relation.RELATED): related.transpose(),
    }
    if desired_edges:
        desired = Adjacency(as_binary(I_O))
        adjacency[(NodeClass.STUDENT, Relation.DESIRED)] = desired
        adjacency[(NodeClass.CONCEPT, Relation.DESIRED)] = desired.transpose()

    return StudentCenteredGraph(
        n_students=n_students,
        n_exercises=n_exercises,
        n_concepts=n_concepts,
        adjacency=adjacency,
    )


def neighbors(g: StudentCenteredGraph, node: Tuple[NodeClass, int], relation: Relation) -> np.ndarray:
    """
    Sorted neighbor indices of ``node`` along ``relation``.

    Raises:
        UsageException: If the relation is invalid for the node class or the index is out of range.
    """
    node_class, index = NodeClass(node[0]), int(node[1])
    relation = Relation(relation)
    if (node_class, relation) not in RELATION_TARGETS:
        raise UsageException(
            f"Relation '{relation.value}' is not defined for node class '{node_class.value}'",
            details={"node_class": node_class.value, "relation": relation.value},
        )
    if not 0 <= index < g.size(node_class):
        raise UsageException(
            f"Node index {index} out of range for class '{node_class.value}'",
            details={"node_class": node_class.value, "index": index},
        )
    if not g.has_relation(node_class, relation):
        return np.zeros(0, dtype=np.int64)
    return g.adj(node_class, relation).neighbors(index).copy()
