"""
Interpretability metrics: degree of agreement (DOA) and mastery inconsistency.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import sparse
from sklearn.metrics import roc_auc_score
from sklearn.metrics.pairwise import cosine_similarity

from icdm.common.exceptions.exceptions import DataValidationException, MetricUndefinedException

TOP_CONCEPTS = 10


@dataclass(frozen=True)
class ConceptAgreement:
    """
    Agreement of one concept.

    ``ordered_pairs`` counts student pairs with strictly greater mastery and
    at least one differing answer on the concept's exercises.
    """
    concept: int
    agreement: float
    ordered_pairs: int


def _response_matrices(students, exercises, scores, n_students: int, n_exercises: int):
    students = np.asarray(students, dtype=np.int64)
    exercises = np.asarray(exercises, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.int64)
    right = scores == 1
    shape = (n_students, n_exercises)
    ones = np.ones(len(students), dtype=np.float64)
    right_matrix = sparse.csr_array((ones[right], (students[right], exercises[right])), shape=shape)
    wrong_matrix = sparse.csr_array((ones[~right], (students[~right], exercises[~right])), shape=shape)
    return right_matrix, wrong_matrix


def concept_agreement(mas: np.ndarray, right, wrong, q_column: np.ndarray, concept: int) -> Optional[ConceptAgreement]:
    """
    DOA of a single concept, or None when no pair qualifies.

    ``concordant[a, b]`` counts the concept's exercises a answered right and b
    wrong; pairs whose answers never differ are skipped.
    """
    tagged = np.flatnonzero(q_column)
    if len(tagged) == 0:
        return None
    concordant = (right[:, tagged] @ wrong[:, tagged].T).toarray()
    differing = concordant + concordant.T

    column = mas[:, concept]
    mask = (column[:, None] > column[None, :]) & (differing > 0)
    ordered_pairs = int(mask.sum())
    if ordered_pairs == 0:
        return None
    agreement = float((concordant[mask] / differing[mask]).sum() / ordered_pairs)
    return ConceptAgreement(concept=concept, agreement=agreement, ordered_pairs=ordered_pairs)


def doa(mas, students, exercises, scores, q_matrix, concepts: Optional[Sequence[int]] = None) -> float:
    """
    Average degree of agreement over ``concepts`` (all concepts when None).

    Raises:
        DataValidationException: If ``mas`` does not cover the logged students.
        MetricUndefinedException: If no listed concept has a valid pair.
    """
    mas = np.asarray(mas, dtype=np.float64)
    q_matrix = np.asarray(q_matrix)
    students = np.asarray(students, dtype=np.int64)
    if len(students) and students.max() >= mas.shape[0]:
        raise DataValidationException(
            "Mastery rows do not cover every logged student",
            details={"mastery_rows": int(mas.shape[0]), "max_student": int(students.max())},
        )
    concepts = range(q_matrix.shape[1]) if concepts is None else list(concepts)
    if len(concepts) == 0:
        raise DataValidationException("DOA needs at least one concept")

    right, wrong = _response_matrices(students, exercises, scores, mas.shape[0], q_matrix.shape[0])
    results = [
        concept_agreement(mas, right, wrong, q_matrix[:, concept], int(concept))
        for concept in concepts
    ]
    values = [result.agreement for result in results if result is not None]
    if not values:
        raise MetricUndefinedException("DOA has no valid student pair for any listed concept")
    return float(np.mean(values))


def top_concepts(exercises, q_matrix, limit: int = TOP_CONCEPTS) -> List[int]:
    """Concepts with the most associated logs; ties go to the lower index, unused concepts never appear."""
    q_matrix = np.asarray(q_matrix, dtype=np.int64)
    counts = q_matrix[np.asarray(exercises, dtype=np.int64)].sum(axis=0)
    order = np.argsort(-counts, kind="stable")
    return [int(concept) for concept in order[:limit] if counts[concept] > 0]


def doa_at_10(mas, students, exercises, scores, q_matrix) -> float:
    concepts = top_concepts(exercises, q_matrix)
    if not concepts:
        raise MetricUndefinedException("No concept has any associated log")
    return doa(mas, students, exercises, scores, q_matrix, concepts)


def inconsistency(mas, ratings) -> float:
    """
    Mean L1 mastery gap to each student's most similar peer, divided by Z.

    Peers are ranked by cosine similarity of rating rows, ties to the lowest
    index. Students with an all-zero rating row are skipped.

    Raises:
        DataValidationException: If mastery and rating rows differ.
        MetricUndefinedException: With fewer than two students or no comparable peer.
    """
    mas = np.asarray(mas, dtype=np.float64)
    ratings = sparse.csr_array(ratings, dtype=np.float64)
    ratings.eliminate_zeros()
    n_students = ratings.shape[0]
    if n_students < 2:
        raise MetricUndefinedException("Inconsistency needs at least two students")
    if mas.shape[0] != n_students:
        raise DataValidationException(
            "Mastery rows must match rating rows",
            details={"mastery_rows": int(mas.shape[0]), "rating_rows": int(n_students)},
        )

    active = np.diff(ratings.indptr) > 0
    similarity = cosine_similarity(sparse.csr_matrix(ratings), dense_output=True)
    similarity[:, ~active] = -np.inf
    np.fill_diagonal(similarity, -np.inf)

    gaps = []
    for student in np.flatnonzero(active):
        row = similarity[student]
        if not np.isfinite(row).any():
            continue
        peer = int(np.argmax(row))
        gaps.append(np.abs(mas[student] - mas[peer]).sum())
    if not gaps:
        raise MetricUndefinedException("No student has a comparable peer")
    return float(np.mean(gaps) / mas.shape[1])


def oracle_doa(mas, true_mastery) -> float:
    """
    Agreement of inferred mastery with known binary mastery.

    Per concept: the share of (master, non-master) pairs ranked correctly,
    ties counted 1/2; averaged over concepts holding both groups.

    Raises:
        MetricUndefinedException: If no concept has both masters and non-masters.
    """
    mas = np.asarray(mas, dtype=np.float64)
    truth = np.asarray(true_mastery, dtype=np.int64)
    if mas.shape != truth.shape:
        raise DataValidationException(
            "Mastery and true mastery shapes differ",
            details={"mastery": list(mas.shape), "truth": list(truth.shape)},
        )
    values = [
        roc_auc_score(truth[:, concept], mas[:, concept])
        for concept in range(truth.shape[1])
        if 0 < truth[:, concept].sum() < truth.shape[0]
    ]
    if not values:
        raise MetricUndefinedException("No concept separates masters from non-masters")
    return float(np.mean(values))
