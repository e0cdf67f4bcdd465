"""
Differentiable primitives over Tensor2.

Binary elementwise ops accept a second operand of the same shape, a single
row (1, c) or a single column (r, 1); nothing more general.
"""
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse, special

from icdm.common.exceptions.exceptions import UsageException
from icdm.diffcore.tensor import DTYPE, Tensor2, make_result

PROB_FLOOR = 1e-7


# --- Shape helpers ---

def _broadcast_shape(op: str, a: Tensor2, b: Tensor2) -> Tuple[int, int]:
    shape = []
    for dim_a, dim_b in zip(a.shape, b.shape):
        if dim_a == dim_b or dim_b == 1:
            shape.append(dim_a)
        elif dim_a == 1:
            shape.append(dim_b)
        else:
            raise UsageException(f"{op}: incompatible shapes {a.shape} and {b.shape}")
    return shape[0], shape[1]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    if shape[0] == 1 and grad.shape[0] != 1:
        grad = grad.sum(axis=0, keepdims=True)
    if shape[1] == 1 and grad.shape[1] != 1:
        grad = grad.sum(axis=1, keepdims=True)
    return grad


def _indices(name: str, idx, upper: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64).reshape(-1)
    if len(idx) and (idx.min() < 0 or idx.max() >= upper):
        raise UsageException(f"{name}: index out of range [0, {upper})")
    return idx


# --- Linear algebra ---

def matmul(a: Tensor2, b: Tensor2) -> Tensor2:
    if a.shape[1] != b.shape[0]:
        raise UsageException(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        return g @ b.value.T, a.value.T @ g

    return make_result("matmul", a.value @ b.value, (a, b), backward)


def hadamard(a: Tensor2, b: Tensor2) -> Tensor2:
    _broadcast_shape("hadamard", a, b)

    def backward(g):
        return _unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)

    return make_result("hadamard", a.value * b.value, (a, b), backward)


def add(a: Tensor2, b: Tensor2) -> Tensor2:
    _broadcast_shape("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result("add", a.value + b.value, (a, b), backward)


def sub(a: Tensor2, b: Tensor2) -> Tensor2:
    _broadcast_shape("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result("sub", a.value - b.value, (a, b), backward)


def scale(a: Tensor2, factor: float) -> Tensor2:
    factor = float(factor)

    def backward(g):
        return (g * factor,)

    return make_result("scale", a.value * factor, (a,), backward)


# --- Row selection and pooling ---

def row_gather(a: Tensor2, idx) -> Tensor2:
    """Rows ``a[idx]``; repeated indices accumulate gradient."""
    idx = _indices("row_gather", idx, a.shape[0])

    def backward(g):
        if len(idx) == 0:
            return (np.zeros_like(a.value),)
        scatter = sparse.csr_array(
            (np.ones(len(idx), dtype=DTYPE), (idx, np.arange(len(idx)))),
            shape=(a.shape[0], len(idx)),
        )
        return (np.asarray(scatter @ g),)

    return make_result("row_gather", a.value[idx], (a,), backward)


def _segment_matrix(segment_ids: np.ndarray, n_segments: int, coefficients: np.ndarray) -> sparse.csr_array:
    return sparse.csr_array(
        (coefficients, (segment_ids, np.arange(len(segment_ids)))),
        shape=(n_segments, len(segment_ids)),
    )


def _segment_combine(op: str, values: Tensor2, segment_ids, n_segments: int, coefficients) -> Tensor2:
    segment_ids = _indices(op, segment_ids, max(n_segments, 1))
    if len(segment_ids) != values.shape[0]:
        raise UsageException(f"{op}: {len(segment_ids)} segment ids for {values.shape[0]} rows")
    width = values.shape[1]
    if len(segment_ids) == 0 or n_segments == 0:
        def backward_empty(g):
            return (np.zeros_like(values.value),)

        return make_result(op, np.zeros((n_segments, width), dtype=DTYPE), (values,), backward_empty)

    pool = _segment_matrix(segment_ids, n_segments, np.asarray(coefficients, dtype=DTYPE))

    def backward(g):
        return (np.asarray(pool.T @ g),)

    return make_result(op, np.asarray(pool @ values.value), (values,), backward)


def segment_mean(values: Tensor2, segment_ids, n_segments: int) -> Tensor2:
    """Mean of the rows sharing a segment id; empty segments give zero rows."""
    segment_ids = np.asarray(segment_ids, dtype=np.int64).reshape(-1)
    counts = np.bincount(segment_ids, minlength=n_segments) if len(segment_ids) else np.zeros(n_segments)
    coefficients = 1.0 / counts[segment_ids] if len(segment_ids) else np.zeros(0)
    return _segment_combine("segment_mean", values, segment_ids, n_segments, coefficients)


def segment_sum(values: Tensor2, segment_ids, n_segments: int, weights: Optional[np.ndarray] = None) -> Tensor2:
    """Weighted sum of the rows sharing a segment id."""
    segment_ids = np.asarray(segment_ids, dtype=np.int64).reshape(-1)
    coefficients = np.ones(len(segment_ids)) if weights is None else np.asarray(weights, dtype=DTYPE).reshape(-1)
    return _segment_combine("segment_sum", values, segment_ids, n_segments, coefficients)


def concat_rows(parts: Sequence[Tensor2]) -> Tensor2:
    if not parts:
        raise UsageException("concat_rows: nothing to concatenate")
    width = parts[0].shape[1]
    if any(part.shape[1] != width for part in parts):
        raise UsageException("concat_rows: parts differ in column count")
    bounds = np.cumsum([0] + [part.shape[0] for part in parts])

    def backward(g):
        return tuple(g[bounds[i]:bounds[i + 1]] for i in range(len(parts)))

    return make_result("concat_rows", np.vstack([part.value for part in parts]), tuple(parts), backward)


def column(a: Tensor2, j: int) -> Tensor2:
    """Column ``j`` as an (r, 1) tensor."""
    if not 0 <= j < a.shape[1]:
        raise UsageException(f"column: index {j} out of range for shape {a.shape}")

    def backward(g):
        grad = np.zeros_like(a.value)
        grad[:, j:j + 1] = g
        return (grad,)

    return make_result("column", a.value[:, j:j + 1].copy(), (a,), backward)


# --- Activations ---

def tanh(a: Tensor2) -> Tensor2:
    out = np.tanh(a.value)

    def backward(g):
        return (g * (1.0 - out ** 2),)

    return make_result("tanh", out, (a,), backward)


def sigmoid(a: Tensor2) -> Tensor2:
    out = special.expit(a.value)

    def backward(g):
        return (g * out * (1.0 - out),)

    return make_result("sigmoid", out, (a,), backward)


def relu(a: Tensor2) -> Tensor2:
    mask = a.value > 0

    def backward(g):
        return (g * mask,)

    return make_result("relu", a.value * mask, (a,), backward)


def softmax_over_fixed_arity(scores: Sequence[Tensor2]) -> Tensor2:
    """
    Row-wise softmax across ``m`` score columns, each of shape (r, 1).

    Returns an (r, m) tensor whose rows sum to 1.
    """
    if not scores or any(score.shape[1] != 1 for score in scores):
        raise UsageException("softmax_over_fixed_arity: expects a non-empty list of (r, 1) columns")
    rows = scores[0].shape[0]
    if any(score.shape[0] != rows for score in scores):
        raise UsageException("softmax_over_fixed_arity: score columns differ in length")
    out = special.softmax(np.hstack([score.value for score in scores]), axis=1)

    def backward(g):
        grad = out * (g - np.sum(g * out, axis=1, keepdims=True))
        return tuple(grad[:, i:i + 1] for i in range(len(scores)))

    return make_result("softmax_over_fixed_arity", out, tuple(scores), backward)


# --- Losses ---

def bce_loss(pred: Tensor2, labels) -> Tensor2:
    """Summed binary cross-entropy; predictions are clamped to [1e-7, 1 - 1e-7]."""
    y = np.asarray(labels, dtype=DTYPE).reshape(pred.shape)
    p = np.clip(pred.value, PROB_FLOOR, 1.0 - PROB_FLOOR)
    inside = (pred.value >= PROB_FLOOR) & (pred.value <= 1.0 - PROB_FLOOR)
    loss = -np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p))

    def backward(g):
        return (g[0, 0] * inside * (p - y) / (p * (1.0 - p)),)

    return make_result("bce_loss", np.array([[loss]], dtype=DTYPE), (pred,), backward)


def sq_norm(a: Tensor2) -> Tensor2:
    """Sum of squared entries as a 1x1 tensor."""

    def backward(g):
        return (2.0 * g[0, 0] * a.value,)

    return make_result("sq_norm", np.array([[np.sum(a.value ** 2)]], dtype=DTYPE), (a,), backward)
