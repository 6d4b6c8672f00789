"""Context n-gram mining around seed drug names, used to author patterns."""

from __future__ import annotations

from collections import Counter
from typing import Iterable

from ..textcore import Corpus, tweet_of
from .lexicon import Lexicon


def mine_context_ngrams(corpus: Corpus, seed_names: Iterable[str], n: int,
                        top_k: int) -> list[tuple[str, str, int]]:
    """Count the ``n`` tokens immediately left and right of each seed occurrence.

    Returns ``(ngram, side, count)`` triples, ``side`` being ``"left"`` or
    ``"right"``, sorted by descending count then lexicographically.
    Occurrences too close to the tweet edge contribute no n-gram on that side.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"n must be 1, 2 or 3, got {n}")
    seeds = Lexicon.from_strings(seed_names)
    if not len(seeds):
        return []
    counts: Counter = Counter()
    for item in corpus.items:
        words = tweet_of(item).words
        for span in seeds.find(words):
            if span.start_token >= n:
                counts[" ".join(words[span.start_token - n:span.start_token]), "left"] += 1
            right = words[span.end_token + 1:span.end_token + 1 + n]
            if len(right) == n:
                counts[" ".join(right), "right"] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
    return [(ngram, side, c) for (ngram, side), c in ranked[:top_k]]
