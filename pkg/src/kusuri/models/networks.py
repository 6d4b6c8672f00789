"""The two tweet classifiers built from the neural core.

``kusuri-dnn``: every token is encoded from its characters (char GRU,
attention over characters, tanh projection) and concatenated with its
word embedding; a bidirectional GRU, attention over words and a sigmoid
head give the probability that the tweet mentions a drug.

``weak-lstm``: word embeddings, a unidirectional LSTM, attention over
words and a sigmoid head.  It is the weakly supervised module-1 filter.

Word embeddings are frozen inputs; every other array is trained.
Parameters live in one flat dict with dotted names (``fwd.W_z``), which
is also the layout of the gradients and of the checkpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..neuralcore import layers as L
from ..neuralcore.functional import BCE_EPS, bce_loss, sigmoid
from ..textcore import Tweet
from .embeddings import EmbeddingTable

KUSURI = "kusuri-dnn"
WEAK = "weak-lstm"
ARCHITECTURES = (KUSURI, WEAK)
CHAR_UNK = "\x00"


@dataclass
class ModelParams:
    architecture: str
    arrays: dict
    hyper: dict
    char_vocab: tuple = ()
    _char_index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")

    @property
    def char_index(self) -> dict:
        if self._char_index is None:
            self._char_index = {c: i for i, c in enumerate(self.char_vocab)}
        return self._char_index

    @property
    def n_params(self) -> int:
        return int(sum(a.size for a in self.arrays.values()))

    def copy(self) -> "ModelParams":
        return ModelParams(self.architecture, {k: v.copy() for k, v in self.arrays.items()},
                           dict(self.hyper), self.char_vocab)

    def with_arrays(self, arrays: dict) -> "ModelParams":
        return ModelParams(self.architecture, arrays, dict(self.hyper), self.char_vocab)


def build_char_vocab(tweets: Sequence[Tweet]) -> tuple:
    chars = {c for t in tweets for tok in t.tokens for c in tok.text}
    chars.discard(CHAR_UNK)
    return (CHAR_UNK,) + tuple(sorted(chars))


def _sub(arrays: dict, prefix: str) -> dict:
    n = len(prefix) + 1
    return {k[n:]: v for k, v in arrays.items() if k.startswith(prefix + ".")}


def _prefixed(prefix: str, d: dict) -> dict:
    return {f"{prefix}.{k}": v for k, v in d.items()}


def init_kusuri(rng: np.random.Generator, char_vocab: tuple, word_dim: int,
                char_dim: int = 25, char_hidden: int = 50, morph_dim: int = 50,
                hidden: int = 100) -> ModelParams:
    arrays = {"char_emb": L.glorot(rng, len(char_vocab), char_dim)}
    arrays.update(_prefixed("char_gru", L.init_gru(rng, char_dim, char_hidden)))
    arrays.update(_prefixed("char_attn", L.init_attention(rng, char_hidden, char_hidden)))
    arrays.update(_prefixed("char_proj", L.init_dense(rng, char_hidden, morph_dim)))
    arrays.update(_prefixed("fwd", L.init_gru(rng, word_dim + morph_dim, hidden)))
    arrays.update(_prefixed("bwd", L.init_gru(rng, word_dim + morph_dim, hidden)))
    arrays.update(_prefixed("word_attn", L.init_attention(rng, 2 * hidden, 2 * hidden)))
    arrays.update(_prefixed("head", L.init_dense(rng, 2 * hidden, 1)))
    hyper = {"word_dim": word_dim, "char_dim": char_dim, "char_hidden": char_hidden,
             "morph_dim": morph_dim, "hidden": hidden}
    return ModelParams(KUSURI, arrays, hyper, tuple(char_vocab))


def init_weak(rng: np.random.Generator, word_dim: int, hidden: int = 100) -> ModelParams:
    arrays = _prefixed("lstm", L.init_lstm(rng, word_dim, hidden))
    arrays.update(_prefixed("attn", L.init_attention(rng, hidden, hidden)))
    arrays.update(_prefixed("head", L.init_dense(rng, hidden, 1)))
    return ModelParams(WEAK, arrays, {"word_dim": word_dim, "hidden": hidden})


# -- batch encoding -------------------------------------------------------

@dataclass
class Batch:
    word_rows: np.ndarray   # (B, T) rows of the embedding matrix
    mask: np.ndarray        # (B, T) valid tokens
    token_ids: np.ndarray   # (B, T) index into the batch's distinct tokens
    chars: np.ndarray       # (U, Lc) char ids of each distinct token
    char_mask: np.ndarray   # (U, Lc)


def encode_batch(tweets: Sequence[Tweet], embeddings: EmbeddingTable,
                 char_index: dict | None) -> Batch:
    """Pad a batch of non-empty tweets; characters are encoded once per distinct token."""
    B = len(tweets)
    T = max(len(t.tokens) for t in tweets)
    word_rows = np.full((B, T), embeddings.unk_row, dtype=np.intp)
    mask = np.zeros((B, T), dtype=bool)
    token_ids = np.zeros((B, T), dtype=np.intp)
    distinct: dict[str, int] = {}
    for b, tweet in enumerate(tweets):
        for t, tok in enumerate(tweet.tokens):
            word_rows[b, t] = embeddings.row(tok.text)
            mask[b, t] = True
            token_ids[b, t] = distinct.setdefault(tok.text, len(distinct))
    if char_index is None:
        return Batch(word_rows, mask, token_ids, np.zeros((0, 0), np.intp),
                     np.zeros((0, 0), bool))
    Lc = max(len(w) for w in distinct)
    chars = np.zeros((len(distinct), Lc), dtype=np.intp)
    char_mask = np.zeros((len(distinct), Lc), dtype=bool)
    for word, u in distinct.items():
        chars[u, :len(word)] = [char_index.get(c, 0) for c in word]
        char_mask[u, :len(word)] = True
    return Batch(word_rows, mask, token_ids, chars, char_mask)


# -- forward / backward -----------------------------------------------------

def _kusuri_forward(params: ModelParams, emb: EmbeddingTable, batch: Batch):
    A = params.arrays
    Xc = A["char_emb"][batch.chars]
    Hc, c_gru = L.gru_forward(_sub(A, "char_gru"), Xc, batch.char_mask)
    L.check_finite("char_gru", Hc)
    _, ctx_c, c_catt = L.attention_forward(_sub(A, "char_attn"), Hc, batch.char_mask)
    M, c_proj = L.dense_forward(_sub(A, "char_proj"), ctx_c, "tanh")
    L.check_finite("char_proj", M)
    X = np.concatenate([emb.vectors[batch.word_rows], M[batch.token_ids]], axis=-1)
    H, c_bi = L.bidirectional_forward("gru", _sub(A, "fwd"), _sub(A, "bwd"), X, batch.mask)
    L.check_finite("bigru", H)
    _, ctx, c_watt = L.attention_forward(_sub(A, "word_attn"), H, batch.mask)
    logits, c_head = L.dense_forward(_sub(A, "head"), ctx, "identity")
    L.check_finite("head", logits)
    cache = (batch, M.shape, emb.dim, c_gru, c_catt, c_proj, c_bi, c_watt, c_head)
    return logits[:, 0], cache


def _kusuri_backward(params: ModelParams, dlogits: np.ndarray, cache) -> dict:
    A = params.arrays
    batch, m_shape, word_dim, c_gru, c_catt, c_proj, c_bi, c_watt, c_head = cache
    grads = {}
    dctx, g = L.dense_backward(_sub(A, "head"), dlogits[:, None], c_head)
    grads.update(_prefixed("head", g))
    dH, g = L.attention_backward(_sub(A, "word_attn"), dctx, c_watt)
    grads.update(_prefixed("word_attn", g))
    dX, gf, gb = L.bidirectional_backward(_sub(A, "fwd"), _sub(A, "bwd"), dH, c_bi)
    grads.update(_prefixed("fwd", gf))
    grads.update(_prefixed("bwd", gb))
    dM = np.zeros(m_shape)
    np.add.at(dM, batch.token_ids[batch.mask], dX[..., word_dim:][batch.mask])
    dctx_c, g = L.dense_backward(_sub(A, "char_proj"), dM, c_proj)
    grads.update(_prefixed("char_proj", g))
    dHc, g = L.attention_backward(_sub(A, "char_attn"), dctx_c, c_catt)
    grads.update(_prefixed("char_attn", g))
    dXc, g = L.gru_backward(_sub(A, "char_gru"), dHc, c_gru)
    grads.update(_prefixed("char_gru", g))
    dE = np.zeros_like(A["char_emb"])
    np.add.at(dE, batch.chars[batch.char_mask], dXc[batch.char_mask])
    grads["char_emb"] = dE
    return grads


def _weak_forward(params: ModelParams, emb: EmbeddingTable, batch: Batch):
    A = params.arrays
    X = emb.vectors[batch.word_rows]
    H, c_lstm = L.lstm_forward(_sub(A, "lstm"), X, batch.mask)
    L.check_finite("lstm", H)
    _, ctx, c_att = L.attention_forward(_sub(A, "attn"), H, batch.mask)
    logits, c_head = L.dense_forward(_sub(A, "head"), ctx, "identity")
    L.check_finite("head", logits)
    return logits[:, 0], (c_lstm, c_att, c_head)


def _weak_backward(params: ModelParams, dlogits: np.ndarray, cache) -> dict:
    A = params.arrays
    c_lstm, c_att, c_head = cache
    grads = {}
    dctx, g = L.dense_backward(_sub(A, "head"), dlogits[:, None], c_head)
    grads.update(_prefixed("head", g))
    dH, g = L.attention_backward(_sub(A, "attn"), dctx, c_att)
    grads.update(_prefixed("attn", g))
    _, g = L.lstm_backward(_sub(A, "lstm"), dH, c_lstm)
    grads.update(_prefixed("lstm", g))
    return grads


_IMPL = {KUSURI: (_kusuri_forward, _kusuri_backward), WEAK: (_weak_forward, _weak_backward)}


def _encode(params: ModelParams, tweets, embeddings) -> Batch:
    char_index = params.char_index if params.architecture == KUSURI else None
    return encode_batch(tweets, embeddings, char_index)


def logits_batch(params: ModelParams, embeddings: EmbeddingTable,
                 tweets: Sequence[Tweet]) -> np.ndarray:
    """Raw head outputs for a batch of non-empty tweets."""
    forward, _ = _IMPL[params.architecture]
    return forward(params, embeddings, _encode(params, tweets, embeddings))[0]


def loss_and_grads(params: ModelParams, embeddings: EmbeddingTable,
                   tweets: Sequence[Tweet], labels) -> tuple[float, dict, np.ndarray]:
    """Mean BCE over a batch of non-empty tweets, its exact gradients, and the probabilities."""
    forward, backward = _IMPL[params.architecture]
    y = np.asarray(labels, dtype=np.float64)
    logits, cache = forward(params, embeddings, _encode(params, tweets, embeddings))
    p = sigmoid(logits)
    loss = float(np.mean(bce_loss(p, y)))
    grads = backward(params, (p - y) / len(y), cache)
    return loss, grads, p


def batch_loss(params: ModelParams, embeddings: EmbeddingTable, tweets, labels) -> float:
    p = sigmoid(logits_batch(params, embeddings, tweets))
    return float(np.mean(bce_loss(p, np.asarray(labels, dtype=np.float64))))


def predict_proba(params: ModelParams, embeddings: EmbeddingTable,
                  tweets: Sequence[Tweet], batch_size: int = 256) -> np.ndarray:
    """Probability per tweet; empty tweets get 0.0 without touching the network.

    Tweets are bucketed by length, so results depend only on the input
    order and ``batch_size``, never on wall-clock state.
    """
    tweets = list(tweets)
    out = np.zeros(len(tweets))
    order = sorted((i for i, t in enumerate(tweets) if t.tokens),
                   key=lambda i: (len(tweets[i].tokens), i))
    for start in range(0, len(order), batch_size):
        idx = order[start:start + batch_size]
        p = sigmoid(logits_batch(params, embeddings, [tweets[i] for i in idx]))
        out[idx] = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    return out


def forward_kusuri(params: ModelParams, embeddings: EmbeddingTable, tweet: Tweet) -> float:
    if params.architecture != KUSURI:
        raise ValueError(f"expected {KUSURI} parameters, got {params.architecture}")
    return float(predict_proba(params, embeddings, [tweet])[0])


def forward_weak(params: ModelParams, embeddings: EmbeddingTable, tweet: Tweet) -> float:
    if params.architecture != WEAK:
        raise ValueError(f"expected {WEAK} parameters, got {params.architecture}")
    return float(predict_proba(params, embeddings, [tweet])[0])


def char_encode(params: ModelParams, token: str) -> np.ndarray:
    """Morphology vector of one token (char GRU -> attention -> tanh projection)."""
    if not token:
        raise ValueError("empty token")
    A = params.arrays
    ids = np.array([[params.char_index.get(c, 0) for c in token]])
    mask = np.ones_like(ids, dtype=bool)
    Hc, _ = L.gru_forward(_sub(A, "char_gru"), A["char_emb"][ids], mask)
    _, ctx, _ = L.attention_forward(_sub(A, "char_attn"), Hc, mask)
    return L.dense_forward(_sub(A, "char_proj"), ctx, "tanh")[0][0]


class Predictor:
    """Callable ``tweets -> probabilities`` bound to parameters and embeddings."""

    def __init__(self, params: ModelParams, embeddings: EmbeddingTable, batch_size: int = 256):
        self.params = params
        self.embeddings = embeddings
        self.batch_size = batch_size

    def __call__(self, tweets: Sequence[Tweet]) -> np.ndarray:
        return predict_proba(self.params, self.embeddings, tweets, self.batch_size)
