from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from icdm.common.schemas import TrainConfig
from icdm.data.dataset import Dataset
from icdm.model.network import ICDMModel


@dataclass
class ModelSnapshot:
    """
    Everything needed to rebuild a trained model: parameters, the training
    logs the graph is built from, and the run configuration.
    """
    params: Dict[str, np.ndarray]
    train: Dataset
    config: TrainConfig
    meta: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_model(cls, model: ICDMModel, **meta) -> ModelSnapshot:
        return cls(params=model.store.state_dict(), train=model.dataset, config=model.config, meta=dict(meta))

    def build_model(self) -> ICDMModel:
        return ICDMModel.from_state(self.train, self.config, self.params)

    def params_digest(self) -> str:
        hasher = hashlib.sha256()
        for name, value in self.params.items():
            hasher.update(name.encode("utf-8"))
            hasher.update(np.ascontiguousarray(value, dtype="<f8").tobytes())
        return hasher.hexdigest()
