"""Activations and loss in float64."""

from __future__ import annotations

import numpy as np

BCE_EPS = 1e-12


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    # 0.5 * (1 + tanh(x/2)) never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def tanh(x):
    return np.tanh(np.asarray(x, dtype=np.float64))


def softmax(v, axis: int = -1):
    v = np.asarray(v, dtype=np.float64)
    shifted = v - np.max(v, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def masked_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over the last axis restricted to ``mask``; masked entries get 0."""
    scores = np.where(mask, scores, -np.inf)
    shifted = scores - np.max(scores, axis=-1, keepdims=True)
    e = np.where(mask, np.exp(shifted), 0.0)
    return e / np.sum(e, axis=-1, keepdims=True)


def bce_loss(p, y):
    p = np.clip(np.asarray(p, dtype=np.float64), BCE_EPS, 1.0 - BCE_EPS)
    y = np.asarray(y, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
