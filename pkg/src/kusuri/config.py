"""Run configuration shared by the command-line tools.

A config file is a JSON object; every block is optional::

    {
      "paths": {"lexicon": "...", "variants": "...", "common_words": "...",
                "patterns": "...", "seeds": "...", "embeddings": "...",
                "weak_model": "...", "ensemble": "..."},
      "train": {"epochs": 10, "batch_size": 32, ...},
      "weak_train": {"epochs": 10, ...},
      "ensemble": {"k": 9, "seeds": null, "threshold": 0.5},
      "variants": {"max_edit_distance": 1, "min_length": 4,
                   "ops_enabled": ["deletion", ...]},
      "weak_threshold": 0.5
    }

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ._io import config_hash
from .ensemble import DEFAULT_K, DEFAULT_THRESHOLD
from .models.training import TrainConfig
from .prefilter.verdict import DEFAULT_WEAK_THRESHOLD
from .variantgen import ALL_OPS

PATH_KEYS = ("lexicon", "variants", "common_words", "patterns", "seeds", "embeddings",
             "weak_model", "ensemble")
_TOP_KEYS = {"paths", "train", "weak_train", "ensemble", "variants", "weak_threshold"}
_VARIANT_KEYS = {"max_edit_distance", "min_length", "ops_enabled"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EnsembleSettings:
    k: int = DEFAULT_K
    seeds: tuple | None = None
    threshold: float = DEFAULT_THRESHOLD

    def member_seeds(self, base: int) -> list[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return [base + i for i in range(self.k)]


@dataclass(frozen=True)
class RunConfig:
    paths: dict = field(default_factory=dict)
    train: TrainConfig = TrainConfig()
    weak_train: TrainConfig = TrainConfig()
    ensemble: EnsembleSettings = EnsembleSettings()
    variants: dict = field(default_factory=dict)
    weak_threshold: float = DEFAULT_WEAK_THRESHOLD

    def as_dict(self) -> dict:
        return {
            "paths": {k: str(v) for k, v in sorted(self.paths.items())},
            "train": self.train.as_dict(),
            "weak_train": self.weak_train.as_dict(),
            "ensemble": {"k": self.ensemble.k,
                         "seeds": None if self.ensemble.seeds is None else list(self.ensemble.seeds),
                         "threshold": self.ensemble.threshold},
            "variants": {k: sorted(v) if isinstance(v, (set, frozenset, list, tuple)) else v
                         for k, v in sorted(self.variants.items())},
            "weak_threshold": self.weak_threshold,
        }

    def digest(self) -> str:
        return config_hash(self.as_dict())

    def with_seed(self, seed: int | None) -> "RunConfig":
        """``--seed`` replaces both training seeds; explicit ensemble seeds stay."""
        if seed is None:
            return self
        return dataclasses.replace(self, train=self.train.replace(rng_seed=seed),
                                   weak_train=self.weak_train.replace(rng_seed=seed))

    def with_paths(self, **paths) -> "RunConfig":
        merged = dict(self.paths)
        merged.update({k: Path(v) for k, v in paths.items() if v is not None})
        return dataclasses.replace(self, paths=merged)

    def path(self, key: str, required: bool = True) -> Path | None:
        p = self.paths.get(key)
        if p is None:
            if required:
                raise ConfigError(f"no '{key}' path configured")
            return None
        if not Path(p).exists():
            raise ConfigError(f"{key} path does not exist: {p}")
        return Path(p)

    def require(self, *keys: str) -> None:
        """Check every named path before any work starts."""
        for key in keys:
            self.path(key)


def _train_block(block, what: str) -> TrainConfig:
    if block is None:
        return TrainConfig()
    if not isinstance(block, dict):
        raise ConfigError(f"'{what}' must be an object")
    names = {f.name for f in dataclasses.fields(TrainConfig)}
    unknown = set(block) - names
    if unknown:
        raise ConfigError(f"unknown keys in '{what}': {sorted(unknown)}")
    try:
        return TrainConfig(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{what}': {exc}") from None


def parse_run_config(doc: dict, base_dir: str | os.PathLike = ".") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = Path(base_dir)
    paths = {}
    for key, value in (doc.get("paths") or {}).items():
        if key not in PATH_KEYS:
            raise ConfigError(f"unknown path key '{key}'")
        if not isinstance(value, str):
            raise ConfigError(f"path '{key}' must be a string")
        paths[key] = base / value
    ens = doc.get("ensemble") or {}
    if set(ens) - {"k", "seeds", "threshold"}:
        raise ConfigError(f"unknown keys in 'ensemble': {sorted(set(ens) - {'k', 'seeds', 'threshold'})}")
    seeds = ens.get("seeds")
    k = ens.get("k", DEFAULT_K if seeds is None else len(seeds))
    if not isinstance(k, int) or k < 1:
        raise ConfigError("ensemble.k must be a positive integer")
    if seeds is not None:
        if not all(isinstance(s, int) for s in seeds) or len(seeds) != k:
            raise ConfigError("ensemble.seeds must list k integers")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("ensemble.seeds must be distinct")
        seeds = tuple(seeds)
    threshold = ens.get("threshold", DEFAULT_THRESHOLD)
    if not isinstance(threshold, (int, float)) or not 0.0 < threshold < 1.0:
        raise ConfigError("ensemble.threshold must lie in (0, 1)")
    variants = dict(doc.get("variants") or {})
    if set(variants) - _VARIANT_KEYS:
        raise ConfigError(f"unknown keys in 'variants': {sorted(set(variants) - _VARIANT_KEYS)}")
    if "ops_enabled" in variants:
        ops = variants["ops_enabled"]
        if not isinstance(ops, list) or set(ops) - ALL_OPS:
            raise ConfigError(f"variants.ops_enabled must be a subset of {sorted(ALL_OPS)}")
        variants["ops_enabled"] = frozenset(ops)
    weak_threshold = doc.get("weak_threshold", DEFAULT_WEAK_THRESHOLD)
    if not isinstance(weak_threshold, (int, float)) or not 0.0 <= weak_threshold <= 1.0:
        raise ConfigError("weak_threshold must lie in [0, 1]")
    return RunConfig(paths, _train_block(doc.get("train"), "train"),
                     _train_block(doc.get("weak_train"), "weak_train"),
                     EnsembleSettings(k, seeds, float(threshold)), variants,
                     float(weak_threshold))


def load_run_config(path: str | os.PathLike | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    return parse_run_config(doc, path.parent)
