"""Scaled dot-product attention and its backward pass"""
from typing import Tuple

import numpy as np

from drift_trust.exceptions import ShapeMismatchException


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax over the last axis"""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=-1, keepdims=True)


def _check_shapes(Q: np.ndarray, K: np.ndarray, V: np.ndarray, d_k: int):
    if d_k <= 0:
        raise ShapeMismatchException(f'd_k must be positive, got {d_k}')
    if Q.ndim != K.ndim or K.ndim != V.ndim or Q.ndim not in (2, 3):
        raise ShapeMismatchException(f'Q, K, V must all be 2-D or all 3-D, got {Q.shape}, {K.shape}, {V.shape}')
    if Q.shape[-1] != d_k or K.shape[-1] != d_k:
        raise ShapeMismatchException(f'Q and K must have width d_k={d_k}, got {Q.shape[-1]} and {K.shape[-1]}')
    if K.shape[-2] != V.shape[-2]:
        raise ShapeMismatchException(f'K and V must have equal row counts, got {K.shape[-2]} and {V.shape[-2]}')
    if Q.ndim == 3 and not Q.shape[0] == K.shape[0] == V.shape[0]:
        raise ShapeMismatchException(f'Batch sizes differ: {Q.shape[0]}, {K.shape[0]}, {V.shape[0]}')


def attention_weights(Q: np.ndarray, K: np.ndarray, d_k: int) -> np.ndarray:
    """softmax(Q K^T / sqrt(d_k)), one row per query"""
    return softmax(Q @ np.swapaxes(K, -1, -2) / np.sqrt(d_k))


def attention(Q: np.ndarray, K: np.ndarray, V: np.ndarray, d_k: int) -> np.ndarray:
    """
    softmax(Q K^T / sqrt(d_k)) V

    Accepts single sequences (2-D) or a batch of sequences (3-D, batch first).
    """
    return attention_with_weights(Q, K, V, d_k)[0]


def attention_with_weights(Q: np.ndarray, K: np.ndarray, V: np.ndarray,
                           d_k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Attention output and the attention weights"""
    Q, K, V = (np.asarray(m, dtype=float) for m in (Q, K, V))
    _check_shapes(Q, K, V, d_k)
    weights = attention_weights(Q, K, d_k)
    return weights @ V, weights


def attention_backward(Q: np.ndarray, K: np.ndarray, V: np.ndarray, weights: np.ndarray,
                       d_out: np.ndarray, d_k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dQ, dK, dV) of attention given the output gradient"""
    d_weights = d_out @ np.swapaxes(V, -1, -2)
    dV = np.swapaxes(weights, -1, -2) @ d_out
    d_scores = weights * (d_weights - np.sum(d_weights * weights, axis=-1, keepdims=True))
    scale = 1.0 / np.sqrt(d_k)
    dQ = d_scores @ K * scale
    dK = np.swapaxes(d_scores, -1, -2) @ Q * scale
    return dQ, dK, dV
