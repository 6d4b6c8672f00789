"""K independently seeded Kusuri DNNs combined by averaging probabilities."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .models.embeddings import EmbeddingTable
from .models.networks import KUSURI, ModelParams, predict_proba
from .models.training import TrainConfig, load_model, save_model, train
from .textcore import Corpus, Tweet

DEFAULT_K = 9
DEFAULT_THRESHOLD = 0.5
MANIFEST_FORMAT = "kusuri-ensemble/1"


@dataclass
class Ensemble:
    members: list
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")

    @property
    def k(self) -> int:
        return len(self.members)


def _train_member(args):
    corpus, embeddings, config = args
    return train(KUSURI, corpus, embeddings, config).params


def train_ensemble(corpus: Corpus, embeddings: EmbeddingTable, config: TrainConfig,
                   seeds: Sequence[int], threshold: float = DEFAULT_THRESHOLD,
                   threads: int = 1) -> Ensemble:
    """Member ``i`` is trained with ``rng_seed=seeds[i]``; nothing else differs."""
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ValueError("ensemble seeds must be pairwise distinct")
    jobs = [(corpus, embeddings, config.replace(rng_seed=s)) for s in seeds]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            members = list(pool.map(_train_member, jobs))
    else:
        members = [_train_member(j) for j in jobs]
    return Ensemble(members, threshold)


def member_probabilities(ensemble: Ensemble, embeddings: EmbeddingTable,
                         tweets: Sequence[Tweet], batch_size: int = 256) -> np.ndarray:
    """``(K, n)`` matrix of member probabilities."""
    tweets = list(tweets)
    return np.array([predict_proba(m, embeddings, tweets, batch_size) for m in ensemble.members])


def average(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    return probs.sum(axis=0) / probs.shape[0]


def weighted_average(probs: np.ndarray, weights) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (probs.shape[0],):
        raise ValueError(f"expected {probs.shape[0]} weights, got {w.shape}")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be non-negative and sum to 1")
    if np.all(w == w[0]):
        return average(probs)
    return np.tensordot(w, probs, axes=1)


def ensemble_predict_many(ensemble: Ensemble, embeddings: EmbeddingTable,
                          tweets: Sequence[Tweet], batch_size: int = 256) -> np.ndarray:
    return average(member_probabilities(ensemble, embeddings, tweets, batch_size))


def ensemble_predict(ensemble: Ensemble, embeddings: EmbeddingTable, tweet: Tweet) -> float:
    return float(ensemble_predict_many(ensemble, embeddings, [tweet])[0])


def soft_vote_predict(ensemble: Ensemble, embeddings: EmbeddingTable, tweet: Tweet,
                      weights=None) -> float:
    """Weighted mean of member probabilities; uniform weights reduce to averaging."""
    probs = member_probabilities(ensemble, embeddings, [tweet])
    if weights is None:
        weights = np.full(ensemble.k, 1.0 / ensemble.k)
    return float(weighted_average(probs, weights)[0])


def decide(probability, threshold: float = DEFAULT_THRESHOLD):
    """Positive iff ``probability >= threshold``; ties go positive."""
    p = np.asarray(probability, dtype=np.float64)
    label = (p >= threshold).astype(int)
    return int(label) if label.ndim == 0 else label


def save_ensemble(ensemble: Ensemble, directory: str | os.PathLike,
                  embeddings_ref: str = "", config_hash: str = "") -> Path:
    """Write one checkpoint per member plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    member_files = []
    for i, member in enumerate(ensemble.members):
        name = f"member_{i:02d}.json"
        with open(directory / name, "w", encoding="utf-8") as fh:
            save_model(member, fh, {"config_hash": config_hash} if config_hash else None)
        member_files.append(name)
    manifest = {
        "format": MANIFEST_FORMAT,
        "members": member_files,
        "threshold": ensemble.threshold,
        "embeddings": embeddings_ref,
        "config_hash": config_hash,
    }
    path = directory / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path: str | os.PathLike) -> dict:
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"{path} is not a {MANIFEST_FORMAT} manifest")
    return manifest


def load_ensemble(path: str | os.PathLike) -> Ensemble:
    path = Path(path)
    manifest = read_manifest(path)
    members = []
    for name in manifest["members"]:
        with open(path.parent / name, encoding="utf-8") as fh:
            member = load_model(fh)
        if member.architecture != KUSURI:
            raise ValueError(f"ensemble member {name} is not a {KUSURI} checkpoint")
        members.append(member)
    return Ensemble(members, float(manifest["threshold"]))
