"""Unit tests for the Dataset class."""
import numpy as np
import pytest

from icdm.common.exceptions.exceptions import DataValidationException
from icdm.data.dataset import Dataset


class TestDataset:
    """Test suite for Dataset class."""

    @pytest.fixture
    def three_logs(self):
        """Return 3 logs among 2 students and 2 exercises."""
        return Dataset(
            students=[0, 0, 1],
            exercises=[0, 1, 0],
            scores=[1, 0, 1],
            q_matrix=[[1], [1]],
            student_ids=[5, 9],
            exercise_ids=[20, 30],
            concept_ids=[1],
        )

    def test_stats(self, three_logs):
        """Test summary statistics computed by hand."""
        stats = three_logs.stats()

        assert stats.students == 2
        assert stats.exercises == 2
        assert stats.concepts == 1
        assert stats.logs == 3
        assert stats.sparsity == pytest.approx(0.75)
        assert stats.avg_correct_rate == pytest.approx(2 / 3)
        assert stats.q_density == pytest.approx(1.0)

    def test_stats_empty(self):
        """Test an empty log set reports zeros."""
        dataset = Dataset(
            students=[], exercises=[], scores=[], q_matrix=[[1]],
            student_ids=[], exercise_ids=[3], concept_ids=[4],
        )

        stats = dataset.stats()

        assert stats.students == 0
        assert stats.logs == 0
        assert stats.sparsity == 0.0
        assert stats.avg_correct_rate == 0.0

    def test_q_shape_mismatch(self):
        """Test a Q-matrix inconsistent with the id arrays."""
        with pytest.raises(DataValidationException):
            Dataset(
                students=[0], exercises=[0], scores=[1], q_matrix=[[1, 0]],
                student_ids=[0], exercise_ids=[0, 1], concept_ids=[0, 1],
            )

    def test_rating_matrix(self, toy_dataset):
        """Test the ternary rating matrix."""
        ratings = toy_dataset.rating_matrix().toarray()

        assert ratings.shape == (4, 3)
        assert ratings[0].tolist() == [1, 1, 1]
        assert ratings[1].tolist() == [1, -1, -1]
        assert ratings[2].tolist() == [-1, 1, 0]
        assert ratings[3].tolist() == [0, -1, 1]

    def test_logs_frame_uses_raw_ids(self, three_logs):
        """Test logs are written with raw ids."""
        frame = three_logs.logs_frame()

        assert frame["student_id"].tolist() == [5, 5, 9]
        assert frame["exercise_id"].tolist() == [20, 30, 20]

    def test_compact_students(self, toy_dataset):
        """Test students without logs are dropped and the rest renumbered."""
        subset = toy_dataset.subset(toy_dataset.students != 1).compact_students()

        assert subset.student_ids.tolist() == [10, 12, 13]
        assert subset.students.max() == 2
        assert subset.n_logs == 7

    def test_align_students(self, toy_dataset):
        """Test logs of unknown students are dropped when aligning."""
        reference = toy_dataset.subset(toy_dataset.students >= 2).compact_students()

        aligned = toy_dataset.align_students(reference)

        assert aligned.student_ids.tolist() == [12, 13]
        assert aligned.n_logs == 4
        assert np.array_equal(aligned.student_ids[aligned.students], [12, 12, 13, 13])

    def test_concept_rows(self, toy_dataset):
        """Test Q rows of logged exercises."""
        rows = toy_dataset.concept_rows(np.array([2, 0]))

        assert rows.tolist() == [[1, 1], [1, 0]]
