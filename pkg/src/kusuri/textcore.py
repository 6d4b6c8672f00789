"""Tweet data model, normalization, tokenization and corpus I/O.

Normalization lowercases the text, replaces URLs and @-mentions by the
``<url>`` and ``<user>`` placeholders and collapses whitespace.  The
tokenizer splits punctuation into separate tokens but keeps hashtags,
digits and word-internal hyphens/apostrophes attached, so ``#amusthave``
and ``percocet-thief`` each stay a single token.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, TextIO, Union

import numpy as np

URL_TOKEN = "<url>"
USER_TOKEN = "<user>"
PLACEHOLDERS = frozenset({URL_TOKEN, USER_TOKEN})

MAX_TOKENS = 64
MAX_TOKEN_CHARS = 25

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"(?<!\w)@\w+")
_TOKEN_RE = re.compile(r"<user>|<url>|[\w#]+(?:['\-][\w#]+)*|\S")


class CorpusFormatError(ValueError):
    """Raised for a malformed corpus file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    text: str
    chars: tuple[int, ...]

    @classmethod
    def from_text(cls, text: str) -> "Token":
        return cls(text, tuple(ord(c) for c in text))


@dataclass(frozen=True)
class Tweet:
    id: str
    raw: str
    norm: str
    tokens: tuple[Token, ...]

    @classmethod
    def from_raw(cls, id: str, raw: str) -> "Tweet":
        norm = normalize(raw)
        return cls(str(id), raw, norm, tuple(tokenize(norm)))

    @property
    def words(self) -> list[str]:
        return [t.text for t in self.tokens]


@dataclass(frozen=True)
class LabeledTweet:
    tweet: Tweet
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")

    @property
    def id(self) -> str:
        return self.tweet.id


Item = Union[Tweet, LabeledTweet]


@dataclass
class Corpus:
    items: list = field(default_factory=list)
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Item]:
        return iter(self.items)

    @property
    def tweets(self) -> list[Tweet]:
        return [tweet_of(item) for item in self.items]

    @property
    def labels(self) -> list[int | None]:
        return [label_of(item) for item in self.items]


def tweet_of(item: Item) -> Tweet:
    return item.tweet if isinstance(item, LabeledTweet) else item


def label_of(item: Item) -> int | None:
    return item.label if isinstance(item, LabeledTweet) else None


def normalize(raw: str) -> str:
    text = raw.lower()
    text = _URL_RE.sub(URL_TOKEN, text)
    text = _MENTION_RE.sub(USER_TOKEN, text)
    return " ".join(text.split())


def tokenize(norm: str, max_tokens: int = MAX_TOKENS,
             max_chars: int = MAX_TOKEN_CHARS) -> list[Token]:
    pieces = _TOKEN_RE.findall(norm)[:max_tokens]
    # a cut inside "a-b" must not leave a dangling joiner
    return [Token.from_text(p if p in PLACEHOLDERS or len(p) <= max_chars
                            else p[:max_chars].rstrip("'-")) for p in pieces]


def make_corpus(texts: Iterable[str], labels: Iterable[int] | None = None,
                ids: Iterable[str] | None = None, provenance: str = "") -> Corpus:
    """Build a corpus from raw strings; ids default to the running index."""
    texts = list(texts)
    ids = [str(i) for i in range(len(texts))] if ids is None else [str(i) for i in ids]
    tweets = [Tweet.from_raw(i, t) for i, t in zip(ids, texts)]
    if labels is None:
        return Corpus(tweets, provenance)
    return Corpus([LabeledTweet(t, int(y)) for t, y in zip(tweets, labels)], provenance)


def iter_records(stream: TextIO) -> Iterator[tuple[int, Item]]:
    """Stream ``(line number, item)`` pairs from a line-delimited corpus file."""
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(record, dict):
            raise CorpusFormatError("record is not an object", lineno)
        if not isinstance(record.get("id"), str):
            raise CorpusFormatError("missing or non-string 'id'", lineno)
        if not isinstance(record.get("text"), str):
            raise CorpusFormatError("missing or non-string 'text'", lineno)
        tweet = Tweet.from_raw(record["id"], record["text"])
        label = record.get("label")
        if label is None:
            yield lineno, tweet
        elif label in (0, 1) and not isinstance(label, bool):
            yield lineno, LabeledTweet(tweet, label)
        else:
            raise CorpusFormatError(f"label must be 0 or 1, got {label!r}", lineno)


def load_corpus(stream: TextIO, provenance: str = "") -> Corpus:
    items = []
    seen: set[str] = set()
    for lineno, item in iter_records(stream):
        if item.id in seen:
            raise CorpusFormatError(f"duplicate id {item.id!r}", lineno)
        seen.add(item.id)
        items.append(item)
    return Corpus(items, provenance)


def record_of(item: Item) -> dict:
    tweet = tweet_of(item)
    record = {"id": tweet.id, "text": tweet.raw}
    label = label_of(item)
    if label is not None:
        record["label"] = label
    return record


def write_corpus(corpus: Corpus, stream: TextIO) -> None:
    for item in corpus.items:
        stream.write(json.dumps(record_of(item), ensure_ascii=False) + "\n")


def dedup(corpus: Corpus) -> Corpus:
    """Keep the first tweet of every distinct normalized text."""
    seen: set[str] = set()
    kept = []
    for item in corpus.items:
        norm = tweet_of(item).norm
        if norm not in seen:
            seen.add(norm)
            kept.append(item)
    return Corpus(kept, corpus.provenance)


def filter_corpus(corpus: Corpus, keep: Callable[[Tweet], bool]) -> Corpus:
    """Hook for external filters such as language identification."""
    return Corpus([it for it in corpus.items if keep(tweet_of(it))], corpus.provenance)


def split_corpus(corpus: Corpus, train_fraction: float,
                 rng_seed: int) -> tuple[Corpus, Corpus]:
    """Random train/test partition; both halves keep the corpus order.

    The train size is ``len(corpus) * train_fraction`` rounded half-up,
    clamped so that neither side is empty.
    """
    n = len(corpus)
    if n < 2:
        raise ValueError("cannot split a corpus with fewer than 2 items")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = min(max(int(math.floor(n * train_fraction + 0.5)), 1), n - 1)
    order = np.random.default_rng(rng_seed).permutation(n)
    in_train = np.zeros(n, dtype=bool)
    in_train[order[:n_train]] = True
    train = [it for it, t in zip(corpus.items, in_train) if t]
    test = [it for it, t in zip(corpus.items, in_train) if not t]
    return Corpus(train, corpus.provenance), Corpus(test, corpus.provenance)
