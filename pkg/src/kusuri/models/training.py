"""Mini-batch Adam training, weak-label construction and model checkpoints."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from ..neuralcore.checkpoint import dump_checkpoint, read_checkpoint, CheckpointError
from ..neuralcore.functional import sigmoid
from ..neuralcore.optim import AdamState, adam_step, clip_by_global_norm
from ..prefilter.lexicon import Lexicon
from ..textcore import Corpus, LabeledTweet, Tweet, label_of, tweet_of
from .embeddings import EmbeddingTable
from .networks import (
    ARCHITECTURES,
    KUSURI,
    ModelParams,
    build_char_vocab,
    init_kusuri,
    init_weak,
    logits_batch,
    loss_and_grads,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    rng_seed: int = 0
    dev_fraction: float = 0.1
    patience: int = 3
    char_dim: int = 25
    char_hidden: int = 50
    morph_dim: int = 50
    word_dim: int | None = None  # None: taken from the embedding table
    hidden: int = 100
    clip_norm: float | None = 5.0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        for name in ("batch_size", "char_dim", "char_hidden", "morph_dim", "hidden", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.dev_fraction <= 0.5:
            raise ValueError("dev_fraction must lie in [0, 0.5]")

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.as_dict(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    dev_loss: float | None = None
    dev_accuracy: float | None = None


@dataclass
class TrainResult:
    params: ModelParams
    history: list = field(default_factory=list)
    best_epoch: int = 0


def _split_xy(corpus: Corpus) -> tuple[list[Tweet], np.ndarray]:
    tweets, labels = [], []
    for item in corpus.items:
        y = label_of(item)
        if y is None:
            raise ValueError(f"tweet {tweet_of(item).id!r} has no label")
        tweets.append(tweet_of(item))
        labels.append(y)
    return tweets, np.asarray(labels, dtype=np.float64)


def stratified_dev_split(labels: np.ndarray, fraction: float,
                         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Indices ``(train, dev)``; each class contributes ``round(fraction * n_c)``."""
    dev = []
    for cls in (0.0, 1.0):
        idx = np.flatnonzero(labels == cls)
        n_dev = int(np.floor(fraction * len(idx) + 0.5))
        if n_dev:
            dev.extend(rng.choice(idx, size=n_dev, replace=False).tolist())
    dev = np.array(sorted(dev), dtype=np.intp)
    train = np.setdiff1d(np.arange(len(labels)), dev)
    return train, dev


def _evaluate(params, embeddings, tweets, y, batch_size=256) -> tuple[float, float]:
    if not tweets:
        return float("nan"), float("nan")
    p = np.zeros(len(tweets))
    for s in range(0, len(tweets), batch_size):
        p[s:s + batch_size] = sigmoid(logits_batch(params, embeddings, tweets[s:s + batch_size]))
    pc = np.clip(p, 1e-12, 1 - 1e-12)
    loss = float(np.mean(-(y * np.log(pc) + (1 - y) * np.log1p(-pc))))
    acc = float(np.mean((p >= 0.5) == (y == 1.0)))
    return loss, acc


def init_params(architecture: str, tweets: Sequence[Tweet], embeddings: EmbeddingTable,
                config: TrainConfig, rng: np.random.Generator) -> ModelParams:
    if config.word_dim is not None and config.word_dim != embeddings.dim:
        raise ValueError(f"config word_dim {config.word_dim} != embedding dim {embeddings.dim}")
    if architecture == KUSURI:
        return init_kusuri(rng, build_char_vocab(tweets), embeddings.dim, config.char_dim,
                           config.char_hidden, config.morph_dim, config.hidden)
    if architecture in ARCHITECTURES:
        return init_weak(rng, embeddings.dim, config.hidden)
    raise ValueError(f"unknown architecture {architecture!r}")


def train(architecture: str, corpus: Corpus, embeddings: EmbeddingTable,
          config: TrainConfig = TrainConfig()) -> TrainResult:
    """Train one network with mini-batch Adam on binary cross-entropy.

    All randomness (initialisation, dev split, shuffling) comes from one
    generator seeded with ``config.rng_seed``.  With a non-empty dev split
    training stops after ``patience`` epochs without dev-loss improvement
    and the parameters of the best dev epoch are returned.  Empty tweets
    are skipped: they never reach the network at prediction time either.
    """
    tweets, y = _split_xy(corpus)
    keep = [i for i, t in enumerate(tweets) if t.tokens]
    tweets, y = [tweets[i] for i in keep], y[keep]
    if len(set(y.tolist())) < 2:
        raise ValueError("training corpus must contain both classes")
    rng = np.random.default_rng(config.rng_seed)
    params = init_params(architecture, tweets, embeddings, config, rng)
    result = TrainResult(params)
    if config.epochs == 0:
        return result

    train_idx, dev_idx = stratified_dev_split(y, config.dev_fraction, rng)
    dev_tweets, dev_y = [tweets[i] for i in dev_idx], y[dev_idx]
    state = AdamState.zeros_like(params.arrays)
    arrays = params.arrays
    best_loss, best_arrays, stale = np.inf, arrays, 0

    for epoch in range(1, config.epochs + 1):
        order = train_idx[rng.permutation(len(train_idx))]
        losses, correct = [], 0
        for s in range(0, len(order), config.batch_size):
            idx = order[s:s + config.batch_size]
            loss, grads, p = loss_and_grads(params.with_arrays(arrays), embeddings,
                                            [tweets[i] for i in idx], y[idx])
            grads = clip_by_global_norm(grads, config.clip_norm)
            arrays, state = adam_step(arrays, grads, state, lr=config.learning_rate)
            losses.append(loss * len(idx))
            correct += int(np.sum((p >= 0.5) == (y[idx] == 1.0)))
        record = EpochRecord(epoch, float(np.sum(losses) / len(order)), correct / len(order))
        if len(dev_idx):
            record.dev_loss, record.dev_accuracy = _evaluate(
                params.with_arrays(arrays), embeddings, dev_tweets, dev_y)
        result.history.append(record)
        log.info("epoch %d train_loss=%.4f train_acc=%.3f dev_loss=%s", epoch,
                 record.train_loss, record.train_accuracy, record.dev_loss)
        if not np.isfinite(record.train_loss):
            raise FloatingPointError(f"non-finite training loss at epoch {epoch}")
        if not len(dev_idx):
            best_arrays, result.best_epoch = arrays, epoch
            continue
        if record.dev_loss < best_loss:
            best_loss, best_arrays, result.best_epoch, stale = record.dev_loss, arrays, epoch, 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    result.params = params.with_arrays(best_arrays)
    return result


def train_accuracy(params: ModelParams, embeddings: EmbeddingTable, corpus: Corpus) -> float:
    tweets, y = _split_xy(corpus)
    return _evaluate(params, embeddings, tweets, y)[1]


def build_weak_training_set(corpus: Corpus, seed_names: Iterable[str],
                            rng_seed: int) -> Corpus:
    """Weak labels: tweets containing a seed name are positive, an equal-size
    uniform sample of the remaining tweets is negative.

    Output order is the corpus order; every tweet appears at most once.
    """
    seeds = Lexicon.from_strings(seed_names)
    tweets = corpus.tweets
    positive = np.array([seeds.matches(t.words) for t in tweets], dtype=bool)
    n_pos = int(positive.sum())
    if n_pos == 0:
        raise ValueError("no positives: no tweet contains a seed name")
    others = np.flatnonzero(~positive)
    if len(others) < n_pos:
        raise ValueError(f"only {len(others)} non-seed tweets for {n_pos} positives")
    rng = np.random.default_rng(rng_seed)
    negative = np.zeros(len(tweets), dtype=bool)
    negative[rng.choice(others, size=n_pos, replace=False)] = True
    items = [LabeledTweet(t, 1 if positive[i] else 0)
             for i, t in enumerate(tweets) if positive[i] or negative[i]]
    return Corpus(items, f"weak supervision from {corpus.provenance}".strip())


def save_model(params: ModelParams, stream: TextIO, extra: dict | None = None) -> None:
    doc_extra = {"char_vocab": list(params.char_vocab)}
    if extra:
        doc_extra.update(extra)
    dump_checkpoint(stream, params.architecture, params.hyper, params.arrays, doc_extra)


def load_model(stream: TextIO) -> ModelParams:
    doc = read_checkpoint(stream)
    if doc["architecture"] not in ARCHITECTURES:
        raise CheckpointError(f"unknown architecture {doc['architecture']!r}")
    return ModelParams(doc["architecture"], doc["params"], doc["hyperparameters"],
                       tuple(doc.get("char_vocab", ())))
