from icdm.diffcore.gradcheck import grad_check
from icdm.diffcore.optim import AdamOptimizer, adam_step, xavier_init
from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import Tensor2, constant

__all__ = [
    "AdamOptimizer",
    "ParameterStore",
    "Tensor2",
    "adam_step",
    "constant",
    "grad_check",
    "xavier_init",
]
