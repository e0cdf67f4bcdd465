"""
Test configuration and fixtures for the inductive cognitive diagnosis pipeline.
"""
from pathlib import Path
from typing import Callable, Dict

import numpy as np
import pandas as pd
import pytest
import structlog

from icdm.common.enums import IFKind
from icdm.common.schemas import SynthConfig, TrainConfig
from icdm.data.dataset import Dataset
from icdm.model.network import ICDMModel
from icdm.model.snapshot import ModelSnapshot
from icdm.services.training_service import TrainingService
from icdm.synth.dina import generate

# Raw ids deliberately differ from dense indices.
TOY_STUDENT_IDS = [10, 11, 12, 13]
TOY_EXERCISE_IDS = [100, 101, 102]
TOY_CONCEPT_IDS = [7, 8]

UNSEEN_FROM = 32
RECOVERY_UNSEEN_FROM = 64


@pytest.fixture(autouse=True)
def reset_structlog():
    """Restore structlog defaults after each test."""
    yield
    structlog.reset_defaults()


@pytest.fixture(scope="function")
def toy_dataset() -> Dataset:
    """Return a 4-student, 3-exercise, 2-concept dataset with right and wrong answers on every exercise."""
    return Dataset(
        students=[0, 0, 0, 1, 1, 1, 2, 2, 3, 3],
        exercises=[0, 1, 2, 0, 1, 2, 0, 1, 1, 2],
        scores=[1, 1, 1, 1, 0, 0, 0, 1, 0, 1],
        q_matrix=[[1, 0], [0, 1], [1, 1]],
        student_ids=TOY_STUDENT_IDS,
        exercise_ids=TOY_EXERCISE_IDS,
        concept_ids=TOY_CONCEPT_IDS,
    )


@pytest.fixture(scope="function")
def small_config() -> TrainConfig:
    """Return a training config small enough for unit tests."""
    return TrainConfig(
        d=8,
        hidden_dims=[8, 4],
        k=2,
        epochs=3,
        batch_size=32,
        lr=0.01,
        patience=3,
        seed=0,
    )


@pytest.fixture(scope="session")
def synthetic():
    """Return a noiseless DINA dataset and its hidden mastery."""
    return generate(
        SynthConfig(
            n_students=40,
            n_exercises=15,
            n_concepts=3,
            q_density=1.5,
            logs_per_student=10,
            seed=1,
        )
    )


@pytest.fixture(scope="function")
def observed_dataset(synthetic) -> Dataset:
    """Return the synthetic logs of the first students, compacted."""
    dataset, _ = synthetic
    return dataset.subset(dataset.students < UNSEEN_FROM).compact_students()


@pytest.fixture(scope="function")
def unseen_logs(synthetic) -> pd.DataFrame:
    """Return raw-id logs of the synthetic students left out of training."""
    dataset, _ = synthetic
    frame = dataset.logs_frame()
    return frame[frame["student_id"] >= UNSEEN_FROM].reset_index(drop=True)


@pytest.fixture(scope="function")
def snapshot_factory(observed_dataset, small_config) -> Callable[..., ModelSnapshot]:
    """Return a builder of untrained snapshots over the observed synthetic students."""

    def _build(if_kind: IFKind = IFKind.GLIF, **overrides) -> ModelSnapshot:
        config = small_config.model_copy(update={"if_kind": if_kind, **overrides})
        return ModelSnapshot.from_model(ICDMModel.initialize(observed_dataset, config))

    return _build


@pytest.fixture(scope="function")
def write_csv(tmp_path) -> Callable[[str, str], str]:
    """Return a helper writing text to a file under tmp_path."""

    def _write(name: str, text: str) -> str:
        path = Path(tmp_path) / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write


def brute_force_auc(preds, labels) -> float:
    positives = [p for p, y in zip(preds, labels) if y == 1]
    negatives = [p for p, y in zip(preds, labels) if y == 0]
    total = 0.0
    for pos in positives:
        for neg in negatives:
            total += 1.0 if pos > neg else 0.5 if pos == neg else 0.0
    return total / (len(positives) * len(negatives))


def random_logs(rng: np.random.Generator, n_students: int, n_exercises: int, density: float = 0.6):
    """Random (students, exercises, scores) with each pair logged at most once."""
    mask = rng.random((n_students, n_exercises)) < density
    students, exercises = np.nonzero(mask)
    scores = rng.integers(0, 2, size=len(students))
    return students.astype(np.int64), exercises.astype(np.int64), scores.astype(np.int64)


@pytest.fixture(scope="session")
def recovery():
    """Return a noiseless single-concept DINA dataset and its hidden mastery."""
    return generate(
        SynthConfig(
            n_students=80,
            n_exercises=24,
            n_concepts=3,
            q_density=1.0,
            logs_per_student=16,
            seed=7,
        )
    )


@pytest.fixture(scope="session")
def trained_snapshots(recovery) -> Dict[IFKind, ModelSnapshot]:
    """Return one snapshot per interaction function, trained on the observed recovery students."""
    dataset, _ = recovery
    observed = dataset.subset(dataset.students < RECOVERY_UNSEEN_FROM).compact_students()
    config = TrainConfig(d=16, hidden_dims=[16, 8], k=2, epochs=30, batch_size=64, lr=0.02, patience=30, seed=0)
    return {
        kind: TrainingService(config.model_copy(update={"if_kind": kind})).train(observed)
        for kind in IFKind
    }


@pytest.fixture(scope="function")
def recovery_unseen_logs(recovery) -> pd.DataFrame:
    """Return raw-id logs of the recovery students left out of training."""
    dataset, _ = recovery
    frame = dataset.logs_frame()
    return frame[frame["student_id"] >= RECOVERY_UNSEEN_FROM].reset_index(drop=True)
