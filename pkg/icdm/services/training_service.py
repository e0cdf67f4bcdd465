from typing import List, Optional, Tuple

import numpy as np

from icdm.common.exceptions.exceptions import MetricUndefinedException, NumericException
from icdm.common.logger import get_logger
from icdm.common.schemas import TrainConfig
from icdm.data.dataset import Dataset
from icdm.data.splits import holdout_rows
from icdm.diffcore.optim import AdamOptimizer
from icdm.metrics.prediction import acc, auc, rmse
from icdm.model.network import ICDMModel
from icdm.model.snapshot import ModelSnapshot
from icdm.schemas.reports import EpochRecord

logger = get_logger()


class TrainingService:
    """
    Mini-batch training with early stopping on validation AUC.
    """

    def __init__(self, config: TrainConfig):
        self.config = config
        self.history: List[EpochRecord] = []

    # --- Data preparation ---

    def prepare(self, train: Dataset, valid: Optional[Dataset] = None) -> Tuple[Dataset, Dataset]:
        """
        Compact training students and express validation logs in their index.

        Without a validation set, ``valid_fraction`` of the training logs is
        held out; every student keeps at least one training log.
        """
        if valid is None:
            rng = np.random.default_rng(self.config.seed)
            mask = np.zeros(train.n_logs, dtype=bool)
            mask[holdout_rows(train.students, self.config.valid_fraction, rng)] = True
            train, valid = train.subset(~mask), train.subset(mask)
        train = train.compact_students()
        return train, valid.align_students(train)

    # --- Loop ---

    def run_epoch(
            self,
            model: ICDMModel,
            optimizer: AdamOptimizer,
            train: Dataset,
            rng: np.random.Generator,
            epoch: int = 0,
    ) -> float:
        """
        One pass over shuffled mini-batches.

        Returns:
            Summed loss over the epoch divided by the number of logs.
        Raises:
            NumericException: If a batch produces a non-finite value.
        """
        order = rng.permutation(train.n_logs)
        total = 0.0
        for batch_index, start in enumerate(range(0, train.n_logs, self.config.batch_size)):
            rows = order[start:start + self.config.batch_size]
            try:
                batch_loss = model.batch_loss(
                    train.students[rows],
                    train.exercises[rows],
                    train.scores[rows],
                    self.config.lambda_reg,
                    training=True,
                    rng=rng,
                )
                batch_loss.backward()
            except NumericException as exc:
                raise NumericException(
                    exc.op,
                    message=f"Non-finite value in op '{exc.op}' at epoch {epoch}, batch {batch_index}",
                    details={"epoch": epoch, "batch": batch_index},
                ) from exc
            optimizer.step()
            model.interaction.clamp_nonneg(model.store)
            total += batch_loss.item()
        return total / max(train.n_logs, 1)

    def validate(self, model: ICDMModel, valid: Dataset) -> EpochRecord:
        if valid.n_logs == 0:
            return EpochRecord(epoch=0, train_loss=0.0)
        preds = model.predict(valid.students, valid.exercises)
        try:
            valid_auc = auc(preds, valid.scores)
        except MetricUndefinedException:
            valid_auc = None
        return EpochRecord(
            epoch=0,
            train_loss=0.0,
            valid_auc=valid_auc,
            valid_acc=acc(preds, valid.scores),
            valid_rmse=rmse(preds, valid.scores),
        )

    def train(self, train: Dataset, valid: Optional[Dataset] = None) -> ModelSnapshot:
        """
        Fit a model on ``train`` and return the best snapshot by validation score.

        The selection score is AUC, then ACC when AUC is undefined, then the
        negated training loss when no validation log exists.
        """
        train, valid = self.prepare(train, valid)
        config = self.config
        model = ICDMModel.initialize(train, config)
        optimizer = AdamOptimizer(model.store, lr=config.lr)
        rng = np.random.default_rng(config.seed)
        logger.info(
            "training_started",
            students=train.n_students,
            exercises=train.n_exercises,
            concepts=train.n_concepts,
            train_logs=train.n_logs,
            valid_logs=valid.n_logs,
            if_kind=config.if_kind.value,
        )

        self.history = []
        best_score, best_epoch, best_state, best_record = -np.inf, 0, model.store.state_dict(), None
        stale = 0
        for epoch in range(1, config.epochs + 1):
            train_loss = self.run_epoch(model, optimizer, train, rng, epoch)
            record = self.validate(model, valid).model_copy(update={"epoch": epoch, "train_loss": train_loss})
            self.history.append(record)
            logger.info("epoch_completed", **record.model_dump())

            score = self._selection_score(record)
            if score > best_score:
                best_score, best_epoch, best_state, best_record = score, epoch, model.store.state_dict(), record
                stale = 0
            else:
                stale += 1
                if stale >= config.patience:
                    logger.info("early_stopping", epoch=epoch, best_epoch=best_epoch)
                    break

        model.store.load_state_dict(best_state)
        return ModelSnapshot.from_model(
            model,
            best_epoch=best_epoch,
            best_valid_auc=best_record.valid_auc if best_record else None,
            epochs_run=len(self.history),
        )

    @staticmethod
    def _selection_score(record: EpochRecord) -> float:
        if record.valid_auc is not None:
            return record.valid_auc
        if record.valid_acc is not None:
            return record.valid_acc
        return -record.train_loss


def train(ds_train: Dataset, ds_valid: Optional[Dataset], cfg: TrainConfig) -> ModelSnapshot:
    return TrainingService(cfg).train(ds_train, ds_valid)
