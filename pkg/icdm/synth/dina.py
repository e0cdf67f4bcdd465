"""
DINA response simulator with known mastery.
"""
from typing import Tuple

import numpy as np
import pandas as pd

from icdm.common.logger import get_logger
from icdm.common.schemas import SynthConfig
from icdm.data.dataset import TRUTH_COLUMNS, Dataset

logger = get_logger()


def sample_q_matrix(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Each exercise tags 1 + Poisson(q_density - 1) concepts, clipped to [1, Z].

    Concepts left untagged are attached to a random exercise so every concept
    survives a CSV round trip.
    """
    n_tags = np.clip(1 + rng.poisson(cfg.q_density - 1.0, size=cfg.n_exercises), 1, cfg.n_concepts)
    q_matrix = np.zeros((cfg.n_exercises, cfg.n_concepts), dtype=np.int8)
    for exercise, count in enumerate(n_tags):
        q_matrix[exercise, rng.choice(cfg.n_concepts, size=int(count), replace=False)] = 1

    for concept in np.flatnonzero(q_matrix.sum(axis=0) == 0):
        q_matrix[rng.integers(cfg.n_exercises), concept] = 1
    return q_matrix


def response_probability(mastery: np.ndarray, q_rows: np.ndarray, guess: float, slip: float) -> np.ndarray:
    """P(right) = 1 - slip when every tagged concept is mastered, else guess."""
    missing = (q_rows.astype(np.int64) * (1 - mastery.astype(np.int64))).sum(axis=1)
    return np.where(missing == 0, 1.0 - slip, guess)


def generate(cfg: SynthConfig) -> Tuple[Dataset, np.ndarray]:
    """
    Sample a dataset and the hidden N x Z binary mastery matrix.

    Raw ids equal dense indices. Each student answers
    min(logs_per_student, n_exercises) distinct exercises.
    """
    rng = np.random.default_rng(cfg.seed)
    true_mastery = rng.binomial(1, 0.5, size=(cfg.n_students, cfg.n_concepts)).astype(np.int8)
    q_matrix = sample_q_matrix(cfg, rng)

    per_student = min(cfg.logs_per_student, cfg.n_exercises)
    students = np.repeat(np.arange(cfg.n_students, dtype=np.int64), per_student)
    exercises = np.concatenate(
        [np.sort(rng.choice(cfg.n_exercises, size=per_student, replace=False)) for _ in range(cfg.n_students)]
    ).astype(np.int64)

    probability = response_probability(true_mastery[students], q_matrix[exercises], cfg.guess, cfg.slip)
    scores = (rng.random(len(students)) < probability).astype(np.int64)

    dataset = Dataset(
        students=students,
        exercises=exercises,
        scores=scores,
        q_matrix=q_matrix,
        student_ids=np.arange(cfg.n_students),
        exercise_ids=np.arange(cfg.n_exercises),
        concept_ids=np.arange(cfg.n_concepts),
    )
    logger.info("synthetic_dataset_generated", **dataset.stats().model_dump())
    return dataset, true_mastery


def truth_frame(dataset: Dataset, true_mastery: np.ndarray) -> pd.DataFrame:
    """Long-format hidden mastery with raw ids."""
    n_students, n_concepts = true_mastery.shape
    return pd.DataFrame(
        {
            "student_id": np.repeat(dataset.student_ids, n_concepts),
            "concept_id": np.tile(dataset.concept_ids, n_students),
            "mastery": true_mastery.reshape(-1).astype(np.int64),
        },
        columns=TRUTH_COLUMNS,
    )
