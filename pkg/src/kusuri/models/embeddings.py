from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np


class EmbeddingFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class EmbeddingTable:
    """Word vectors; row ``len(index)`` of ``vectors`` is the unknown-word vector."""

    index: dict
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def unk_row(self) -> int:
        return len(self.index)

    @property
    def unk(self) -> np.ndarray:
        return self.vectors[self.unk_row]

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def row(self, word: str) -> int:
        return self.index.get(word, self.unk_row)

    def lookup(self, word: str) -> np.ndarray:
        return self.vectors[self.row(word)]

    @classmethod
    def from_dict(cls, entries: dict, dim: int | None = None) -> "EmbeddingTable":
        words = list(entries)
        if not words:
            if dim is None:
                raise ValueError("cannot infer dimension of an empty table")
            return cls({}, np.zeros((1, dim)))
        mat = np.asarray([entries[w] for w in words], dtype=np.float64)
        if dim is not None and mat.shape[1] != dim:
            raise ValueError(f"vectors have dimension {mat.shape[1]}, expected {dim}")
        unk = mat.mean(axis=0)
        return cls({w: i for i, w in enumerate(words)}, np.vstack([mat, unk]))


def load_embeddings(stream: TextIO, dim: int | None = None) -> EmbeddingTable:
    """Read ``word v1 ... vd`` lines, optionally preceded by a ``count dim`` header.

    The unknown-word vector is the mean of all loaded vectors.  A word seen
    twice keeps its first vector.
    """
    words: dict[str, int] = {}
    rows: list[list[float]] = []
    for lineno, line in enumerate(stream, start=1):
        parts = line.rstrip("\n").split()
        if not parts:
            continue
        if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
            header_dim = int(parts[1])
            if dim is not None and header_dim != dim:
                raise EmbeddingFormatError(f"header dimension {header_dim} != {dim}", lineno)
            dim = header_dim
            continue
        word, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise EmbeddingFormatError(f"expected {dim} values, got {len(values)}", lineno)
        try:
            vec = [float(v) for v in values]
        except ValueError:
            raise EmbeddingFormatError("non-numeric vector component", lineno) from None
        if word not in words:
            words[word] = len(rows)
            rows.append(vec)
    if dim is None or not rows:
        raise EmbeddingFormatError("no embedding vectors found")
    mat = np.asarray(rows, dtype=np.float64)
    return EmbeddingTable(words, np.vstack([mat, mat.mean(axis=0)]))


def write_embeddings(table: EmbeddingTable, stream: TextIO) -> None:
    stream.write(f"{len(table)} {table.dim}\n")
    for word, i in table.index.items():
        stream.write(word + " " + " ".join(repr(float(x)) for x in table.vectors[i]) + "\n")
