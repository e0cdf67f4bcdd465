"""Unit tests for the TrainingService class."""
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from icdm.common.exceptions.exceptions import NumericException
from icdm.diffcore.optim import AdamOptimizer
from icdm.model.network import ICDMModel
from icdm.schemas.reports import EpochRecord
from icdm.services.training_service import TrainingService


class TestTrainingService:
    """Test suite for TrainingService class."""

    @pytest.fixture
    def service(self, small_config):
        """Return a TrainingService with the small config."""
        return TrainingService(small_config)

    def test_prepare_keeps_every_student(self, service, observed_dataset):
        """Test the validation holdout leaves each student a training log."""
        train, valid = service.prepare(observed_dataset)

        assert train.n_students == observed_dataset.n_students
        assert train.n_logs + valid.n_logs == observed_dataset.n_logs
        assert valid.n_logs > 0

    def test_loss_decreases(self, small_config, observed_dataset):
        """Test the epoch loss drops over a few passes."""
        service = TrainingService(small_config.model_copy(update={"lr": 0.02}))
        model = ICDMModel.initialize(observed_dataset, service.config)
        optimizer = AdamOptimizer(model.store, lr=service.config.lr)
        rng = np.random.default_rng(0)

        losses = [service.run_epoch(model, optimizer, observed_dataset, rng, epoch) for epoch in range(1, 9)]

        assert losses[-1] < losses[0]

    def test_train_deterministic(self, small_config, observed_dataset):
        """Test two runs with the same seed give identical parameters."""
        first = TrainingService(small_config).train(observed_dataset)
        second = TrainingService(small_config).train(observed_dataset)

        assert first.params_digest() == second.params_digest()
        assert first.meta == second.meta

    def test_train_keeps_monotonic_weights_nonneg(self, service, observed_dataset):
        """Test clamped interaction weights after training."""
        snapshot = service.train(observed_dataset)
        model = snapshot.build_model()

        for name in model.interaction.nonneg_parameters():
            assert snapshot.params[name].min() >= 0.0

    def test_train_records_history(self, service, observed_dataset):
        """Test the snapshot metadata and per-epoch history."""
        snapshot = service.train(observed_dataset)

        assert len(service.history) == snapshot.meta["epochs_run"]
        assert [record.epoch for record in service.history] == list(range(1, len(service.history) + 1))
        assert 1 <= snapshot.meta["best_epoch"] <= snapshot.meta["epochs_run"]

    def test_numeric_failure_reports_position(self, service, toy_dataset):
        """Test a non-finite batch names its epoch and batch."""
        model = MagicMock()
        model.batch_loss.side_effect = NumericException("sigmoid")

        with pytest.raises(NumericException) as exc_info:
            service.run_epoch(model, MagicMock(), toy_dataset, np.random.default_rng(0), epoch=4)

        assert exc_info.value.op == "sigmoid"
        assert exc_info.value.details == {"op": "sigmoid", "epoch": 4, "batch": 0}

    def test_early_stopping(self, small_config, observed_dataset):
        """Test training stops once validation stalls for `patience` epochs."""
        service = TrainingService(small_config.model_copy(update={"epochs": 10, "patience": 2}))
        stalled = EpochRecord(epoch=0, train_loss=0.0, valid_auc=0.5)

        with patch.object(TrainingService, "validate", return_value=stalled):
            snapshot = service.train(observed_dataset)

        assert snapshot.meta["epochs_run"] == 3
        assert snapshot.meta["best_epoch"] == 1
        assert snapshot.meta["best_valid_auc"] == 0.5
