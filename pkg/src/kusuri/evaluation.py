"""Precision/recall/F1, Cohen's kappa, exact McNemar test and error export."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from .textcore import Corpus, tweet_of


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class PrfMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed: float
    expected: float


@dataclass(frozen=True)
class McNemarResult:
    b: int
    c: int
    p_value: float


def _aligned(a, b, what: str = "vectors") -> tuple[list[int], list[int]]:
    if isinstance(a, Mapping) or isinstance(b, Mapping):
        if not (isinstance(a, Mapping) and isinstance(b, Mapping)):
            raise TypeError("either both or neither input must be keyed by id")
        if set(a) != set(b):
            missing = sorted(set(a) ^ set(b))[:5]
            raise ValueError(f"id mismatch between {what}, e.g. {missing}")
        keys = list(b)
        return [int(a[k]) for k in keys], [int(b[k]) for k in keys]
    a, b = [int(x) for x in a], [int(x) for x in b]
    if len(a) != len(b):
        raise ValueError(f"length mismatch between {what}: {len(a)} != {len(b)}")
    return a, b


def confusion(predictions, gold) -> ConfusionCounts:
    """Counts with 1 as the positive class; accepts sequences or id-keyed mappings."""
    pred, ref = _aligned(predictions, gold, "predictions and gold")
    tp = sum(1 for p, g in zip(pred, ref) if p == 1 and g == 1)
    fp = sum(1 for p, g in zip(pred, ref) if p == 1 and g == 0)
    fn = sum(1 for p, g in zip(pred, ref) if p == 0 and g == 1)
    return ConfusionCounts(tp, fp, fn, len(pred) - tp - fp - fn)


def f1_from_pr(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def prf(counts: ConfusionCounts) -> PrfMetrics:
    """Percentages; a zero denominator yields 0."""
    p = 100.0 * counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    r = 100.0 * counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    return PrfMetrics(p, r, f1_from_pr(p, r))


def cohen_kappa(labels_a, labels_b) -> KappaResult:
    a, b = _aligned(labels_a, labels_b, "annotations")
    n = len(a)
    if n == 0:
        raise ValueError("kappa needs at least one item")
    observed = sum(1 for x, y in zip(a, b) if x == y) / n
    pa, pb = sum(a) / n, sum(b) / n
    expected = pa * pb + (1 - pa) * (1 - pb)
    if expected >= 1.0:
        # both raters constant and equal: agreement is perfect by construction
        return KappaResult(1.0 if observed == 1.0 else 0.0, observed, expected)
    return KappaResult((observed - expected) / (1.0 - expected), observed, expected)


def mcnemar_exact(b: int, c: int) -> float:
    """Two-sided exact binomial p-value of ``min(b, c)`` under Binomial(b + c, 1/2)."""
    n = b + c
    if n == 0:
        return 1.0
    tail = sum(comb(n, k) for k in range(min(b, c) + 1))
    return float(min(Fraction(1), Fraction(2 * tail, 2 ** n)))


def mcnemar(preds_a, preds_b, gold) -> McNemarResult:
    """``b`` counts items A gets right and B wrong, ``c`` the reverse."""
    a, ref = _aligned(preds_a, gold, "predictions A and gold")
    bb, ref2 = _aligned(preds_b, gold, "predictions B and gold")
    if ref != ref2:
        raise ValueError("gold vectors disagree after alignment")
    b = sum(1 for x, y, g in zip(a, bb, ref) if x == g and y != g)
    c = sum(1 for x, y, g in zip(a, bb, ref) if x != g and y == g)
    return McNemarResult(b, c, mcnemar_exact(b, c))


def metrics_report(counts: ConfusionCounts) -> dict:
    m = prf(counts)
    return {**asdict(counts), "precision": round(m.precision, 1),
            "recall": round(m.recall, 1), "f1": round(m.f1, 1)}


def error_report(predictions: Sequence[int], gold: Sequence[int], corpus: Corpus,
                 records: Sequence | None = None) -> tuple[list[dict], list[dict]]:
    """False positives and false negatives with text, filter verdicts and probability.

    ``records`` are optional classification records aligned with the corpus.
    """
    pred, ref = _aligned(predictions, gold, "predictions and gold")
    if len(pred) != len(corpus):
        raise ValueError("predictions and corpus differ in length")
    fps, fns = [], []
    for i, (p, g, item) in enumerate(zip(pred, ref, corpus.items)):
        if p == g:
            continue
        tweet = tweet_of(item)
        entry = {"id": tweet.id, "text": tweet.raw, "gold": g, "predicted": p}
        if records is not None:
            rec = records[i]
            entry["probability"] = rec.probability
            entry.update(rec.verdict.as_dict())
        (fps if p == 1 else fns).append(entry)
    return fps, fns
