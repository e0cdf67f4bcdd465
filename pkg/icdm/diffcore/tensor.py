"""
Dense 2-D matrices with reverse-mode gradient accumulation.

Every op returns a new Tensor2 holding its parents and a backward rule; the
tape is the DAG reachable from the loss, walked in reverse topological order.
"""
from __future__ import annotations

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from icdm.common.exceptions.exceptions import NumericException, UsageException

DTYPE = np.float64

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor2:
    """A real matrix with an optional gradient slot."""

    __slots__ = ("value", "grad", "requires_grad", "name", "op", "_parents", "_backward")

    def __init__(self, value, requires_grad: bool = False, name: Optional[str] = None):
        array = np.array(value, dtype=DTYPE)
        if array.ndim != 2:
            raise UsageException(f"Tensor2 expects a 2-D value, got shape {array.shape}")
        self.value: np.ndarray = array
        self.requires_grad = requires_grad
        self.name = name
        self.op = "leaf"
        self.grad: Optional[np.ndarray] = np.zeros_like(array) if requires_grad else None
        self._parents: Tuple[Tensor2, ...] = ()
        self._backward: Optional[BackwardFn] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.value.shape

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def item(self) -> float:
        if self.shape != (1, 1):
            raise UsageException(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.value[0, 0])

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.value)

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every reachable leaf's grad."""
        if self.shape != (1, 1):
            raise UsageException(f"backward() needs a scalar 1x1 tensor, got {self.shape}")
        if not self.requires_grad:
            return

        pending: Dict[int, np.ndarray] = {id(self): np.ones_like(self.value)}
        for node in reversed(_topological_order(self)):
            upstream = pending.pop(id(node), None)
            if upstream is None:
                continue
            if node.is_leaf:
                node.grad = upstream if node.grad is None else node.grad + upstream
                continue
            for parent, grad in zip(node._parents, node._backward(upstream)):
                if grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                pending[key] = grad if key not in pending else pending[key] + grad

    def __repr__(self) -> str:
        label = self.name or self.op
        return f"Tensor2({label}, shape={self.shape}, requires_grad={self.requires_grad})"


def _topological_order(root: Tensor2) -> List[Tensor2]:
    order: List[Tensor2] = []
    visited = set()
    stack: List[Tuple[Tensor2, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def constant(value) -> Tensor2:
    return Tensor2(value, requires_grad=False)


def make_result(op: str, value: np.ndarray, parents: Sequence[Tensor2], backward: BackwardFn) -> Tensor2:
    """
    Wrap an op's forward value, recording parents only when a gradient can flow.

    Raises:
        NumericException: If the value holds NaN or Inf.
    """
    if not np.all(np.isfinite(value)):
        raise NumericException(op)
    out = Tensor2.__new__(Tensor2)
    out.value = value
    out.name = None
    out.op = op
    out.grad = None
    out.requires_grad = any(parent.requires_grad for parent in parents)
    if out.requires_grad:
        out._parents = tuple(parents)
        out._backward = backward
    else:
        out._parents = ()
        out._backward = None
    return out
