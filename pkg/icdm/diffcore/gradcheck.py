from typing import Callable

import numpy as np

from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import Tensor2

FD_STEP = 1e-4
ERROR_FLOOR = 1e-4


def relative_error(analytic: float, numeric: float, floor: float = ERROR_FLOOR) -> float:
    """|a - n| / max(|a|, |n|, floor); the floor keeps near-zero gradients from dominating."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def grad_check(
        f: Callable[[], Tensor2],
        params: ParameterStore,
        probes: int,
        seed: int = 0,
        step: float = FD_STEP,
) -> float:
    """
    Compare backprop gradients with central differences on random scalar entries.

    Args:
        f: Deterministic scalar computation over ``params`` (dropout disabled)
        params: Store whose entries are probed
        probes: Number of (tensor, entry) pairs to test
        seed: Seed for choosing the probes
        step: Finite-difference step
    Returns:
        The largest relative error among the probes.
    """
    params.zero_grad()
    f().backward()
    analytic = {name: tensor.grad.copy() for name, tensor in params.items()}
    params.zero_grad()

    named = params.items()
    sizes = np.array([tensor.value.size for _, tensor in named], dtype=np.int64)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        flat = int(rng.integers(int(sizes.sum())))
        which = int(np.searchsorted(np.cumsum(sizes), flat, side="right"))
        name, tensor = named[which]
        entry = np.unravel_index(flat - int(sizes[:which].sum()), tensor.shape)

        original = tensor.value[entry]
        tensor.value[entry] = original + step
        plus = f().item()
        tensor.value[entry] = original - step
        minus = f().item()
        tensor.value[entry] = original

        numeric = (plus - minus) / (2.0 * step)
        worst = max(worst, relative_error(float(analytic[name][entry]), numeric))
    return worst
