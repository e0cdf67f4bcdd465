import re
from typing import List, Optional

import numpy as np
import pandas as pd

from icdm.common.exceptions.exceptions import (
    DataValidationException,
    ParseException,
    UnknownExerciseException,
)
from icdm.common.logger import get_logger
from icdm.data.dataset import LOG_COLUMNS, Q_COLUMNS, TARGET_COLUMNS, TRUTH_COLUMNS, Dataset
from icdm.repositories.base_repo import BaseRepo

logger = get_logger()

_LINE_PATTERN = re.compile(r"line (\d+)")


class DatasetRepo(BaseRepo):
    """CSV persistence for response logs and Q-matrices."""

    # --- Reading ---

    def read_logs(self, path: str) -> pd.DataFrame:
        """
        Parse a logs CSV into an int64 frame.

        Raises:
            DataFileNotFoundException: If the file does not exist.
            ParseException: On a malformed row or a score outside {0, 1}.
            DataValidationException: On a repeated (student, exercise) pair.
        """
        frame = self._read_int_table(path, LOG_COLUMNS)

        invalid_score = ~frame["score"].isin([0, 1]).to_numpy()
        if invalid_score.any():
            row = int(np.flatnonzero(invalid_score)[0])
            raise ParseException(path, row + 2, f"score must be 0 or 1, got {frame['score'].iloc[row]}")

        duplicated = frame.duplicated(["student_id", "exercise_id"]).to_numpy()
        if duplicated.any():
            row = int(np.flatnonzero(duplicated)[0])
            raise DataValidationException(
                "Duplicate (student, exercise) log",
                details={
                    "path": path,
                    "line": row + 2,
                    "student_id": int(frame["student_id"].iloc[row]),
                    "exercise_id": int(frame["exercise_id"].iloc[row]),
                },
            )
        return frame

    def read_q(self, path: str) -> pd.DataFrame:
        frame = self._read_int_table(path, Q_COLUMNS)
        return frame.drop_duplicates().reset_index(drop=True)

    def read_targets(self, path: str) -> pd.DataFrame:
        return self._read_int_table(path, TARGET_COLUMNS)

    def read_truth(self, path: str) -> pd.DataFrame:
        return self._read_int_table(path, TRUTH_COLUMNS)

    def load(self, logs_path: str, q_path: str) -> Dataset:
        return self.build(self.read_logs(logs_path), self.read_q(q_path))

    @staticmethod
    def build(logs: pd.DataFrame, q: pd.DataFrame) -> Dataset:
        """Remap raw ids to dense indices and assemble a Dataset."""
        exercise_ids, q_rows = np.unique(q["exercise_id"].to_numpy(dtype=np.int64), return_inverse=True)
        concept_ids, q_cols = np.unique(q["concept_id"].to_numpy(dtype=np.int64), return_inverse=True)
        q_matrix = np.zeros((len(exercise_ids), len(concept_ids)), dtype=np.int8)
        q_matrix[q_rows.reshape(-1), q_cols.reshape(-1)] = 1

        raw_exercises = logs["exercise_id"].to_numpy(dtype=np.int64)
        exercises = map_ids(exercise_ids, raw_exercises)

        student_ids, students = np.unique(logs["student_id"].to_numpy(dtype=np.int64), return_inverse=True)
        return Dataset(
            students=students.reshape(-1),
            exercises=exercises,
            scores=logs["score"].to_numpy(dtype=np.int64),
            q_matrix=q_matrix,
            student_ids=student_ids,
            exercise_ids=exercise_ids,
            concept_ids=concept_ids,
        )

    # --- Writing ---

    def save(self, dataset: Dataset, logs_path: str, q_path: Optional[str] = None) -> None:
        self.write_frame(dataset.logs_frame(), logs_path)
        if q_path is not None:
            self.write_frame(dataset.q_frame(), q_path)

    def write_frame(self, frame: pd.DataFrame, path: str) -> None:
        with self.atomic_write(path) as handle:
            frame.to_csv(handle, index=False)

    # --- Helpers ---

    def _read_int_table(self, path: str, columns: List[str]) -> pd.DataFrame:
        file_path = self.require_file(path)
        try:
            frame = pd.read_csv(file_path, dtype=str, keep_default_na=False, encoding="utf-8")
        except pd.errors.EmptyDataError:
            raise ParseException(path, 1, f"missing header, expected {','.join(columns)}")
        except pd.errors.ParserError as exc:
            match = _LINE_PATTERN.search(str(exc))
            raise ParseException(path, int(match.group(1)) if match else None, str(exc))

        header = [str(name).strip() for name in frame.columns]
        if header != columns:
            raise ParseException(path, 1, f"expected header {','.join(columns)}, got {','.join(header)}")
        frame.columns = columns

        parsed = {}
        for column in columns:
            values = frame[column].astype(str).str.strip()
            malformed = ~values.str.fullmatch(r"\d+").fillna(False).to_numpy(dtype=bool)
            if malformed.any():
                row = int(np.flatnonzero(malformed)[0])
                raise ParseException(
                    path, row + 2, f"column '{column}' must be a non-negative integer, got {values.iloc[row]!r}"
                )
            parsed[column] = values.astype(np.int64)
        return pd.DataFrame(parsed, columns=columns)


def map_ids(known_ids: np.ndarray, raw_ids: np.ndarray) -> np.ndarray:
    """
    Translate raw exercise ids to dense indices.

    Raises:
        UnknownExerciseException: For the first id missing from ``known_ids``.
    """
    raw_ids = np.asarray(raw_ids, dtype=np.int64)
    if len(raw_ids) == 0:
        return np.zeros(0, dtype=np.int64)
    if len(known_ids) == 0:
        raise UnknownExerciseException(int(raw_ids[0]))
    positions = np.clip(np.searchsorted(known_ids, raw_ids), 0, len(known_ids) - 1)
    missing = known_ids[positions] != raw_ids
    if missing.any():
        raise UnknownExerciseException(int(raw_ids[np.flatnonzero(missing)[0]]))
    return positions.astype(np.int64)


def load_dataset(logs_path: str, q_path: str) -> Dataset:
    """Load and validate a logs/Q-matrix pair."""
    dataset = DatasetRepo().load(logs_path, q_path)
    logger.info("dataset_loaded", logs_path=logs_path, q_path=q_path, **dataset.stats().model_dump())
    return dataset
