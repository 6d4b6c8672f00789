"""JSON checkpoints holding parameter arrays as nested lists of doubles.

Python's float repr is the shortest string that round-trips, so a saved
array reloads bit-for-bit.
"""

from __future__ import annotations

import json
from typing import TextIO

import numpy as np

FORMAT_VERSION = "kusuri-checkpoint/1"


class CheckpointError(ValueError):
    pass


def dump_checkpoint(stream: TextIO, architecture: str, hyperparameters: dict,
                    params: dict, extra: dict | None = None) -> None:
    doc = {
        "format": FORMAT_VERSION,
        "architecture": architecture,
        "hyperparameters": hyperparameters,
        "params": {k: np.asarray(v, dtype=np.float64).tolist() for k, v in params.items()},
    }
    if extra:
        doc.update(extra)
    json.dump(doc, stream, sort_keys=True, separators=(",", ":"), allow_nan=False)
    stream.write("\n")


def read_checkpoint(stream: TextIO) -> dict:
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"invalid checkpoint JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_VERSION:
        raise CheckpointError(f"not a {FORMAT_VERSION} document")
    for key in ("architecture", "hyperparameters", "params"):
        if key not in doc:
            raise CheckpointError(f"checkpoint lacks {key!r}")
    doc["params"] = {k: np.asarray(v, dtype=np.float64) for k, v in doc["params"].items()}
    return doc
