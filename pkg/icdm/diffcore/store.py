from __future__ import annotations

import hashlib
from collections import OrderedDict
from typing import Dict, Iterator, List, Tuple

import numpy as np

from icdm.common.exceptions.exceptions import UsageException
from icdm.diffcore.tensor import Tensor2

EMBEDDING_TABLES = ("embedding.student", "embedding.right", "embedding.wrong", "embedding.concept")


class ParameterStore:
    """Named trainable tensors, kept in registration order."""

    def __init__(self):
        self._tensors: "OrderedDict[str, Tensor2]" = OrderedDict()

    def register(self, name: str, value: np.ndarray) -> Tensor2:
        if name in self._tensors:
            raise UsageException(f"Parameter '{name}' already registered")
        tensor = Tensor2(value, requires_grad=True, name=name)
        self._tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor2:
        try:
            return self._tensors[name]
        except KeyError:
            raise UsageException(f"Unknown parameter '{name}'")

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self) -> List[Tuple[str, Tensor2]]:
        return list(self._tensors.items())

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def embedding_tables(self) -> List[Tensor2]:
        return [self[name] for name in EMBEDDING_TABLES]

    def h0(self) -> np.ndarray:
        """The four embedding tables stacked row-wise."""
        return np.vstack([table.value for table in self.embedding_tables()])

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: tensor.value.copy() for name, tensor in self._tensors.items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        for name, tensor in self._tensors.items():
            if name not in state:
                raise UsageException(f"Missing parameter '{name}' in state")
            value = np.asarray(state[name], dtype=tensor.value.dtype)
            if value.shape != tensor.shape:
                raise UsageException(f"Shape mismatch for '{name}': {value.shape} != {tensor.shape}")
            tensor.value = value.copy()

    @classmethod
    def from_state_dict(cls, state: Dict[str, np.ndarray]) -> ParameterStore:
        store = cls()
        for name, value in state.items():
            store.register(name, value)
        return store

    def digest(self) -> str:
        """sha256 over names, shapes and little-endian values."""
        hasher = hashlib.sha256()
        for name, tensor in self._tensors.items():
            hasher.update(name.encode("utf-8"))
            hasher.update(np.asarray(tensor.shape, dtype="<i8").tobytes())
            hasher.update(np.ascontiguousarray(tensor.value, dtype="<f8").tobytes())
        return hasher.hexdigest()
