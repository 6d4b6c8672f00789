"""Two-module orchestration: prefilter selection, then the ensemble decides."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .ensemble import Ensemble, decide, ensemble_predict_many
from .models.embeddings import EmbeddingTable
from .prefilter.lexicon import Lexicon
from .prefilter.patterns import PatternSet
from .prefilter.verdict import DEFAULT_WEAK_THRESHOLD, FilterVerdict, WeakModel, run_filters_batch
from .textcore import Corpus, Tweet

POSITIVE_CANDIDATE = "positive_candidate"
NEGATIVE_CANDIDATE = "negative_candidate"
EXCLUDED = "excluded"


def select_candidates(verdict: FilterVerdict) -> bool:
    """Lexicon or variant hits pass alone; pattern and weak hits only together."""
    return verdict.lex or verdict.var or (verdict.pat and verdict.weak)


def all_verdicts() -> list[FilterVerdict]:
    return [FilterVerdict(*bits) for bits in product((False, True), repeat=4)]


@dataclass(frozen=True)
class ClassificationRecord:
    id: str
    label: int
    probability: float | None
    verdict: FilterVerdict

    def as_dict(self) -> dict:
        return {"id": self.id, "label": self.label, "probability": self.probability,
                **self.verdict.as_dict()}


@dataclass(frozen=True)
class GoldCandidate:
    tweet: Tweet
    fired_count: int
    proposed_label: str


def proposed_label(fired_count: int) -> str:
    if fired_count >= 2:
        return POSITIVE_CANDIDATE
    if fired_count == 1:
        return NEGATIVE_CANDIDATE
    return EXCLUDED


def classify_tweets(tweets: Sequence[Tweet], lexicon: Lexicon, variants: Lexicon,
                    patterns: PatternSet, weak_model: WeakModel | None, ensemble: Ensemble,
                    embeddings: EmbeddingTable,
                    weak_threshold: float = DEFAULT_WEAK_THRESHOLD) -> list[ClassificationRecord]:
    tweets = list(tweets)
    verdicts = run_filters_batch(tweets, lexicon, variants, patterns, weak_model, weak_threshold)
    selected = [i for i, v in enumerate(verdicts) if select_candidates(v)]
    probs = {}
    if selected:
        p = ensemble_predict_many(ensemble, embeddings, [tweets[i] for i in selected])
        probs = dict(zip(selected, p.tolist()))
    records = []
    for i, (tweet, verdict) in enumerate(zip(tweets, verdicts)):
        if i in probs:
            records.append(ClassificationRecord(
                tweet.id, decide(probs[i], ensemble.threshold), probs[i], verdict))
        else:
            records.append(ClassificationRecord(tweet.id, 0, None, verdict))
    return records


def classify_corpus(corpus: Corpus, lexicon: Lexicon, variants: Lexicon, patterns: PatternSet,
                    weak_model: WeakModel | None, ensemble: Ensemble, embeddings: EmbeddingTable,
                    weak_threshold: float = DEFAULT_WEAK_THRESHOLD,
                    chunk_size: int = 4096) -> list[ClassificationRecord]:
    """Label every tweet; only selected tweets are scored by the ensemble."""
    tweets = corpus.tweets
    records: list[ClassificationRecord] = []
    for s in range(0, len(tweets), chunk_size):
        chunk = tweets[s:s + chunk_size]
        try:
            records.extend(classify_tweets(chunk, lexicon, variants, patterns, weak_model,
                                           ensemble, embeddings, weak_threshold))
        except Exception as exc:
            ids = f"{chunk[0].id}..{chunk[-1].id}"
            raise RuntimeError(f"classification failed for tweets {ids}: {exc}") from exc
    return records


def build_gold_candidates(corpus: Corpus, verdicts: Iterable[FilterVerdict]) -> list[GoldCandidate]:
    """Two or more firing classifiers propose a positive, exactly one a negative."""
    tweets = corpus.tweets
    verdicts = list(verdicts)
    if len(verdicts) != len(tweets):
        raise ValueError(f"{len(verdicts)} verdicts for {len(tweets)} tweets")
    return [GoldCandidate(t, v.fired_count, proposed_label(v.fired_count))
            for t, v in zip(tweets, verdicts)]


def lexicon_variant_baseline(corpus: Corpus, lexicon: Lexicon, variants: Lexicon) -> list[int]:
    """Positive whenever a lexicon phrase or a variant occurs."""
    return [int(lexicon.matches(t.words) or variants.matches(t.words)) for t in corpus.tweets]


def ensemble_only(corpus: Corpus, ensemble: Ensemble, embeddings: EmbeddingTable) -> tuple[list[int], list[float]]:
    """Module 2 applied to every tweet, without prefiltering."""
    p = ensemble_predict_many(ensemble, embeddings, corpus.tweets)
    return decide(p, ensemble.threshold).tolist(), p.tolist()
