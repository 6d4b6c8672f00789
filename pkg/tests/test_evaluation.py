import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import binomtest
from sklearn.metrics import cohen_kappa_score

from kusuri.evaluation import (
    ConfusionCounts,
    cohen_kappa,
    confusion,
    error_report,
    f1_from_pr,
    mcnemar,
    mcnemar_exact,
    metrics_report,
    prf,
)
from kusuri.textcore import make_corpus

from oracles import cohen_kappa_from_table

bits = st.lists(st.integers(0, 1), min_size=1, max_size=60)

# reference (precision, recall, F1) triples, each F1 rounded to one decimal
REFERENCE_ROWS = [
    (66.4, 88.5, 75.9),
    (93.5, 89.5, 91.4),  # F1 inconsistent with its own P and R by 0.06
    (93.3, 90.4, 91.8),
    (93.7, 92.5, 93.1),
    (95.1, 92.5, 93.7),
    (53.4, 67.1, 59.5),
    (10.5, 84.1, 18.7),
    (95.3, 63.6, 76.3),
]


def test_confusion_examples():
    assert confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1]) == ConfusionCounts(2, 1, 1, 1)
    c = confusion([1, 0, 1], [1, 0, 1])
    assert c.fp == c.fn == 0
    c = confusion([0, 1, 0], [1, 0, 1])
    assert c.tp == c.tn == 0


def test_confusion_by_id():
    pred = {"a": 1, "b": 0}
    assert confusion(pred, {"b": 0, "a": 1}) == ConfusionCounts(1, 0, 0, 1)
    with pytest.raises(ValueError):
        confusion(pred, {"a": 1, "c": 0})
    with pytest.raises(ValueError):
        confusion([1, 0], [1])


@pytest.mark.parametrize("p, r, expected", REFERENCE_ROWS)
def test_reference_f1_rows(p, r, expected):
    assert abs(f1_from_pr(p, r) - expected) <= 0.2


def test_f1_examples():
    assert round(f1_from_pr(95.1, 92.5), 1) == 93.8
    assert round(f1_from_pr(66.4, 88.5), 1) == 75.9
    assert round(f1_from_pr(10.5, 84.1), 1) == 18.7
    assert f1_from_pr(100, 100) == 100
    assert f1_from_pr(0, 0) == 0


@given(bits)
def test_prf_perfect_and_all_negative(gold):
    perfect = prf(confusion(gold, gold))
    negative = prf(confusion([0] * len(gold), gold))
    if any(gold):
        assert (perfect.precision, perfect.recall, perfect.f1) == (100.0, 100.0, 100.0)
        assert negative.recall == 0.0
    assert negative.precision == 0.0


def test_kappa_examples():
    a = [1] * 40 + [1] * 10 + [0] * 10 + [0] * 40
    b = [1] * 40 + [0] * 10 + [1] * 10 + [0] * 40
    k = cohen_kappa(a, b)
    assert k.kappa == pytest.approx(0.6, abs=1e-12)
    assert (k.observed, k.expected) == (pytest.approx(0.8), pytest.approx(0.5))
    assert cohen_kappa_from_table(40, 10, 10, 40) == pytest.approx(0.6, abs=1e-12)
    assert cohen_kappa(a, a).kappa == 1.0
    assert cohen_kappa([1] * 10, [1] * 5 + [0] * 5).kappa == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        cohen_kappa([1, 0], [1])


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
def test_kappa_symmetric_and_matches_sklearn(pairs):
    a, b = [p[0] for p in pairs], [p[1] for p in pairs]
    k = cohen_kappa(a, b).kappa
    assert k == pytest.approx(cohen_kappa(b, a).kappa, abs=1e-12)
    assert cohen_kappa(a, a).kappa == 1.0
    assert -1.0 <= k <= 1.0
    if len(set(a)) > 1 or len(set(b)) > 1:
        assert k == pytest.approx(cohen_kappa_score(a, b), abs=1e-9)


def test_mcnemar_examples():
    assert mcnemar_exact(0, 0) == 1.0
    assert mcnemar_exact(10, 0) == pytest.approx(0.001953125, abs=1e-9)
    gold = [1, 0, 1, 0]
    same = mcnemar(gold, gold, gold)
    assert (same.b, same.c, same.p_value) == (0, 0, 1.0)
    res = mcnemar([1, 0, 1, 1], [0, 0, 1, 0], [1, 0, 1, 0])
    assert (res.b, res.c) == (1, 1)


@given(st.integers(0, 80), st.integers(0, 80))
def test_mcnemar_antisymmetric_and_matches_binomtest(b, c):
    p = mcnemar_exact(b, c)
    assert p == mcnemar_exact(c, b)
    assert 0.0 <= p <= 1.0
    if b + c:
        assert p == pytest.approx(binomtest(b, b + c, 0.5).pvalue, rel=1e-9, abs=1e-15)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)),
                min_size=1, max_size=50))
def test_mcnemar_swap(triples):
    a, b, g = ([t[i] for t in triples] for i in range(3))
    ab, ba = mcnemar(a, b, g), mcnemar(b, a, g)
    assert (ab.b, ab.c) == (ba.c, ba.b) and ab.p_value == ba.p_value


def test_metrics_report_rounds():
    report = metrics_report(ConfusionCounts(2, 1, 1, 1))
    assert report == {"tp": 2, "fp": 1, "fn": 1, "tn": 1, "precision": 66.7,
                      "recall": 66.7, "f1": 66.7}
    json.dump(report, io.StringIO())


def test_error_report():
    corpus = make_corpus(["xanax", "pizza", "advil", "game"])
    fps, fns = error_report([1, 1, 0, 0], [1, 0, 1, 0], corpus)
    assert [e["text"] for e in fps] == ["pizza"]
    assert [e["text"] for e in fns] == ["advil"]
    assert fps[0]["gold"] == 0 and fps[0]["predicted"] == 1
    with pytest.raises(ValueError):
        error_report([1], [1], corpus)
