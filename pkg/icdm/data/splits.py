"""
Transductive and inductive train/test partitions.
"""
from typing import Tuple

import numpy as np

from icdm.common.enums import SplitMode
from icdm.common.exceptions.exceptions import ConfigException
from icdm.common.logger import get_logger
from icdm.common.schemas import SplitSpec
from icdm.data.dataset import Dataset

logger = get_logger()


def _check_fraction(name: str, value) -> float:
    if value is None or not 0.0 < float(value) < 1.0:
        raise ConfigException(f"{name} must lie strictly inside (0, 1)", details={name: value})
    return float(value)


def _check_mode(spec: SplitSpec, expected: SplitMode) -> None:
    if SplitMode(spec.mode) is not expected:
        raise ConfigException(
            f"Split mode '{SplitMode(spec.mode).value}' used where '{expected.value}' is required",
            details={"mode": SplitMode(spec.mode).value},
        )


def holdout_rows(students: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """
    Choose floor(fraction * n) log rows uniformly at random.

    The first row of every student in the shuffled order is never chosen,
    so each student keeps at least one row outside the holdout.
    """
    n_logs = len(students)
    n_holdout = int(np.floor(fraction * n_logs))
    order = rng.permutation(n_logs)

    _, first_seen = np.unique(students[order], return_index=True)
    eligible = np.ones(n_logs, dtype=bool)
    eligible[first_seen] = False

    chosen = order[eligible][:n_holdout]
    return np.sort(chosen)


def split_transductive(ds: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
    """
    Partition logs into (train, test) uniformly at random.

    Raises:
        ConfigException: If the split mode is not transductive or the fraction is out of range.
    """
    _check_mode(spec, SplitMode.TRANSDUCTIVE)
    fraction = _check_fraction("test_fraction", spec.test_fraction)

    rng = np.random.default_rng(spec.seed)
    test_mask = np.zeros(ds.n_logs, dtype=bool)
    test_mask[holdout_rows(ds.students, fraction, rng)] = True

    train, test = ds.subset(~test_mask), ds.subset(test_mask)
    logger.info("split_created", mode="transductive", train_logs=train.n_logs, test_logs=test.n_logs)
    return train, test


def split_inductive(ds: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset, Dataset]:
    """
    Hold out test logs, then route training logs by student membership.

    Returns:
        (train_O, train_U, test): logs of observed students, logs of unseen
        students and the intact test set, all in ``ds``'s index space.
    Raises:
        ConfigException: If the split mode is not inductive or a fraction is out of range.
    """
    _check_mode(spec, SplitMode.INDUCTIVE)
    fraction = _check_fraction("test_fraction", spec.test_fraction)
    p_n = _check_fraction("p_n", spec.p_n)

    rng = np.random.default_rng(spec.seed)
    test_mask = np.zeros(ds.n_logs, dtype=bool)
    test_mask[holdout_rows(ds.students, fraction, rng)] = True

    n_unseen = int(np.floor(p_n * ds.n_students))
    unseen = np.zeros(ds.n_students, dtype=bool)
    unseen[rng.permutation(ds.n_students)[:n_unseen]] = True

    routed_unseen = unseen[ds.students]
    train_observed = ds.subset(~test_mask & ~routed_unseen)
    train_unseen = ds.subset(~test_mask & routed_unseen)
    test = ds.subset(test_mask)
    logger.info(
        "split_created",
        mode="inductive",
        observed_logs=train_observed.n_logs,
        unseen_logs=train_unseen.n_logs,
        test_logs=test.n_logs,
        unseen_students=n_unseen,
    )
    return train_observed, train_unseen, test
