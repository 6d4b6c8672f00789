"""Whole-model gradient check on a tiny random network."""

from __future__ import annotations

import numpy as np

from ..neuralcore.gradcheck import finite_diff_gradients, max_relative_error
from ..textcore import Tweet
from .embeddings import EmbeddingTable
from .networks import KUSURI, WEAK, batch_loss, build_char_vocab, init_kusuri, init_weak, loss_and_grads

_WORDS = ("took", "some", "xanax", "for", "my", "headache", "halls", "at", "school", "ugh")
_TEXTS = ("took some xanax for my headache", "halls at school ugh",
          "my xanx for headache", "ugh school")


def tiny_model(architecture: str, seed: int = 0, word_dim: int = 5, hidden: int = 6):
    """Parameters, embeddings, tweets and labels small enough for finite differences."""
    rng = np.random.default_rng(seed)
    emb = EmbeddingTable.from_dict({w: rng.normal(size=word_dim) for w in _WORDS})
    tweets = [Tweet.from_raw(str(i), t) for i, t in enumerate(_TEXTS)]
    labels = np.array([1, 0, 1, 0])
    if architecture == KUSURI:
        params = init_kusuri(rng, build_char_vocab(tweets), word_dim, char_dim=3,
                             char_hidden=4, morph_dim=4, hidden=hidden)
    elif architecture == WEAK:
        params = init_weak(rng, word_dim, hidden)
    else:
        raise ValueError(f"unknown architecture {architecture!r}")
    # move biases off zero so their gradients are exercised too
    params = params.with_arrays({k: v + 0.1 * rng.normal(size=v.shape)
                                 for k, v in params.arrays.items()})
    return params, emb, tweets, labels


def model_gradient_check(architecture: str, seed: int = 0,
                         epsilon: float = 1e-5) -> tuple[float, str]:
    """Max relative error between backprop and central differences, and where it occurs."""
    params, emb, tweets, labels = tiny_model(architecture, seed)
    _, analytic, _ = loss_and_grads(params, emb, tweets, labels)

    def loss(arrays):
        return batch_loss(params.with_arrays(arrays), emb, tweets, labels)

    numeric = finite_diff_gradients(loss, params.arrays, epsilon)
    return max_relative_error(analytic, numeric)
