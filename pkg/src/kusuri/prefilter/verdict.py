from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Callable, Sequence

import numpy as np

from ..textcore import Tweet
from .lexicon import Lexicon
from .patterns import PatternSet, pattern_classify

# maps a batch of tweets to positive-class probabilities
WeakModel = Callable[[Sequence[Tweet]], np.ndarray]

DEFAULT_WEAK_THRESHOLD = 0.5


@dataclass(frozen=True)
class FilterVerdict:
    lex: bool
    var: bool
    pat: bool
    weak: bool

    @property
    def fired_count(self) -> int:
        return sum(astuple(self))

    def as_dict(self) -> dict:
        return {"lex": self.lex, "var": self.var, "pat": self.pat, "weak": self.weak}


def run_filters_batch(tweets: Sequence[Tweet], lexicon: Lexicon, variants: Lexicon,
                      patterns: PatternSet, weak_model: WeakModel | None,
                      weak_threshold: float = DEFAULT_WEAK_THRESHOLD) -> list[FilterVerdict]:
    tweets = list(tweets)
    if weak_model is None or not tweets:
        weak = np.zeros(len(tweets), dtype=bool)
    else:
        weak = np.asarray(weak_model(tweets), dtype=float) >= weak_threshold
    return [
        FilterVerdict(
            lex=lexicon.matches(t.words),
            var=variants.matches(t.words),
            pat=pattern_classify(patterns, t),
            weak=bool(w),
        )
        for t, w in zip(tweets, weak)
    ]


def run_filters(tweet: Tweet, lexicon: Lexicon, variants: Lexicon, patterns: PatternSet,
                weak_model: WeakModel | None,
                weak_threshold: float = DEFAULT_WEAK_THRESHOLD) -> FilterVerdict:
    return run_filters_batch([tweet], lexicon, variants, patterns, weak_model,
                             weak_threshold)[0]
