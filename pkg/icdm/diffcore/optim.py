from typing import Dict, Tuple, Union

import numpy as np

from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import Tensor2

SeedLike = Union[int, np.random.Generator]


def xavier_bound(shape: Tuple[int, int]) -> float:
    rows, cols = shape
    return float(np.sqrt(6.0 / (rows + cols)))


def xavier_init(shape: Tuple[int, int], seed: SeedLike) -> Tensor2:
    """Uniform entries in +-sqrt(6 / (fan_in + fan_out))."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    bound = xavier_bound(shape)
    return Tensor2(rng.uniform(-bound, bound, size=shape), requires_grad=True)


class AdamOptimizer:
    """
    Adaptive-moment optimizer over a ParameterStore.

    Attributes:
        lr: Learning rate
        betas: First and second moment decay constants
        eps: Denominator guard
        step_count: Number of completed steps
    """

    def __init__(
            self,
            store: ParameterStore,
            lr: float = 1e-3,
            betas: Tuple[float, float] = (0.9, 0.999),
            eps: float = 1e-8,
    ):
        self.store = store
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.step_count = 0
        self.first_moment: Dict[str, np.ndarray] = {
            name: np.zeros_like(tensor.value) for name, tensor in store.items()
        }
        self.second_moment: Dict[str, np.ndarray] = {
            name: np.zeros_like(tensor.value) for name, tensor in store.items()
        }

    def step(self) -> None:
        """Apply one update from the accumulated grads, then zero them."""
        beta1, beta2 = self.betas
        self.step_count += 1
        correction1 = 1.0 - beta1 ** self.step_count
        correction2 = 1.0 - beta2 ** self.step_count

        for name, tensor in self.store.items():
            grad = tensor.grad
            if grad is None:
                continue
            m = self.first_moment[name]
            v = self.second_moment[name]
            m *= beta1
            m += (1.0 - beta1) * grad
            v *= beta2
            v += (1.0 - beta2) * grad ** 2
            tensor.value = tensor.value - self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)

        self.store.zero_grad()


def adam_step(store: ParameterStore, opt_state: AdamOptimizer) -> None:
    opt_state.step()
