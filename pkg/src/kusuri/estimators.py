"""scikit-learn style wrappers around the filters, the networks and the ensemble.

Inputs ``X`` are sequences of raw strings, :class:`Tweet` objects or a
:class:`Corpus`; labels ``y`` are 0/1.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .ensemble import DEFAULT_THRESHOLD, Ensemble, decide, ensemble_predict_many, train_ensemble
from .models.embeddings import EmbeddingTable
from .models.networks import ARCHITECTURES, KUSURI, Predictor, predict_proba
from .models.training import TrainConfig, train
from .pipeline import select_candidates
from .prefilter.lexicon import Lexicon
from .prefilter.patterns import PatternSet
from .prefilter.verdict import DEFAULT_WEAK_THRESHOLD, FilterVerdict, run_filters_batch
from .textcore import Corpus, LabeledTweet, Tweet

_TRAIN_FIELDS = ("epochs", "batch_size", "learning_rate", "dev_fraction", "patience",
                 "char_dim", "char_hidden", "morph_dim", "hidden", "clip_norm")


def check_texts(X) -> list[Tweet]:
    """Coerce ``X`` to a list of tweets; strings get positional ids."""
    if isinstance(X, Corpus):
        return X.tweets
    if isinstance(X, (str, bytes)):
        raise TypeError("expected a sequence of texts, got a single string")
    if isinstance(X, np.ndarray):
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        elif X.ndim != 1:
            raise ValueError(f"expected a 1-d array of texts, got shape {X.shape}")
    tweets = []
    for i, x in enumerate(X):
        if isinstance(x, Tweet):
            tweets.append(x)
        elif isinstance(x, LabeledTweet):
            tweets.append(x.tweet)
        elif isinstance(x, str):
            tweets.append(Tweet.from_raw(str(i), x))
        else:
            raise TypeError(f"element {i} is {type(x).__name__}, expected str or Tweet")
    return tweets


def check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n:
        raise ValueError(f"expected {n} labels, got shape {y.shape}")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return y.astype(int)


def _corpus(X, y) -> Corpus:
    tweets = check_texts(X)
    labels = check_labels(y, len(tweets))
    return Corpus([LabeledTweet(t, int(l)) for t, l in zip(tweets, labels)])


def _check_embeddings(embeddings) -> EmbeddingTable:
    if not isinstance(embeddings, EmbeddingTable):
        raise TypeError("embeddings must be an EmbeddingTable")
    return embeddings


class _TrainParamsMixin:
    def _train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(rng_seed=int(seed), **{f: getattr(self, f) for f in _TRAIN_FIELDS})


class KusuriClassifier(_TrainParamsMixin, ClassifierMixin, BaseEstimator):
    """One recurrent tweet classifier; ``architecture`` picks the Kusuri DNN or the weak LSTM."""

    def __init__(self, embeddings=None, architecture: str = KUSURI, epochs: int = 10,
                 batch_size: int = 32, learning_rate: float = 1e-3, dev_fraction: float = 0.1,
                 patience: int = 3, char_dim: int = 25, char_hidden: int = 50,
                 morph_dim: int = 50, hidden: int = 100, clip_norm: float | None = 5.0,
                 threshold: float = DEFAULT_THRESHOLD, random_state: int = 0):
        self.embeddings = embeddings
        self.architecture = architecture
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.dev_fraction = dev_fraction
        self.patience = patience
        self.char_dim = char_dim
        self.char_hidden = char_hidden
        self.morph_dim = morph_dim
        self.hidden = hidden
        self.clip_norm = clip_norm
        self.threshold = threshold
        self.random_state = random_state

    def fit(self, X, y):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        emb = _check_embeddings(self.embeddings)
        result = train(self.architecture, _corpus(X, y), emb, self._train_config(self.random_state))
        self.params_ = result.params
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.classes_ = np.array([0, 1])
        return self

    def _positive_proba(self, X) -> np.ndarray:
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit before predicting")
        return predict_proba(self.params_, self.embeddings, check_texts(X))

    def predict_proba(self, X) -> np.ndarray:
        p = self._positive_proba(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return decide(self._positive_proba(X), self.threshold)


class AveragingEnsemble(_TrainParamsMixin, ClassifierMixin, BaseEstimator):
    """``n_members`` Kusuri DNNs seeded ``random_state + i``, probabilities averaged."""

    def __init__(self, embeddings=None, n_members: int = 9, seeds=None, epochs: int = 10,
                 batch_size: int = 32, learning_rate: float = 1e-3, dev_fraction: float = 0.1,
                 patience: int = 3, char_dim: int = 25, char_hidden: int = 50,
                 morph_dim: int = 50, hidden: int = 100, clip_norm: float | None = 5.0,
                 threshold: float = DEFAULT_THRESHOLD, random_state: int = 0, n_jobs: int = 1):
        self.embeddings = embeddings
        self.n_members = n_members
        self.seeds = seeds
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.dev_fraction = dev_fraction
        self.patience = patience
        self.char_dim = char_dim
        self.char_hidden = char_hidden
        self.morph_dim = morph_dim
        self.hidden = hidden
        self.clip_norm = clip_norm
        self.threshold = threshold
        self.random_state = random_state
        self.n_jobs = n_jobs

    def member_seeds(self) -> list[int]:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return [int(self.random_state) + i for i in range(int(self.n_members))]

    def fit(self, X, y):
        emb = _check_embeddings(self.embeddings)
        self.ensemble_ = train_ensemble(_corpus(X, y), emb, self._train_config(self.random_state),
                                        self.member_seeds(), self.threshold, self.n_jobs)
        self.classes_ = np.array([0, 1])
        return self

    @classmethod
    def from_ensemble(cls, ensemble: Ensemble, embeddings: EmbeddingTable) -> "AveragingEnsemble":
        est = cls(embeddings=embeddings, n_members=ensemble.k, threshold=ensemble.threshold)
        est.ensemble_ = ensemble
        est.classes_ = np.array([0, 1])
        return est

    def _positive_proba(self, X) -> np.ndarray:
        if not hasattr(self, "ensemble_"):
            raise NotFittedError("call fit before predicting")
        return ensemble_predict_many(self.ensemble_, self.embeddings, check_texts(X))

    def predict_proba(self, X) -> np.ndarray:
        p = self._positive_proba(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return decide(self._positive_proba(X), self.ensemble_.threshold)


class Prefilter(TransformerMixin, BaseEstimator):
    """Stateless transformer from texts to an ``(n, 4)`` matrix of lex/var/pat/weak bits.

    ``weak_model`` may be a fitted :class:`KusuriClassifier` or any callable
    returning positive-class probabilities for a list of tweets.
    """

    def __init__(self, lexicon: Lexicon | None = None, variants: Lexicon | None = None,
                 patterns: PatternSet | None = None, weak_model=None,
                 weak_threshold: float = DEFAULT_WEAK_THRESHOLD):
        self.lexicon = lexicon
        self.variants = variants
        self.patterns = patterns
        self.weak_model = weak_model
        self.weak_threshold = weak_threshold

    def fit(self, X=None, y=None):
        if not isinstance(self.lexicon, Lexicon):
            raise TypeError("lexicon must be a Lexicon")
        self.n_features_out_ = 4
        return self

    def _weak(self):
        wm = self.weak_model
        if isinstance(wm, KusuriClassifier):
            return Predictor(wm.params_, wm.embeddings)
        return wm

    def verdicts(self, X) -> list[FilterVerdict]:
        if not hasattr(self, "n_features_out_"):
            self.fit()
        variants = self.variants if self.variants is not None else Lexicon(frozenset(), "empty")
        patterns = self.patterns if self.patterns is not None else PatternSet(())
        return run_filters_batch(check_texts(X), self.lexicon, variants, patterns,
                                 self._weak(), self.weak_threshold)

    def transform(self, X) -> np.ndarray:
        vs = self.verdicts(X)
        return np.array([[v.lex, v.var, v.pat, v.weak] for v in vs], dtype=int).reshape(-1, 4)

    def select(self, X) -> np.ndarray:
        return np.array([select_candidates(v) for v in self.verdicts(X)], dtype=bool)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.array(["lex", "var", "pat", "weak"], dtype=object)


class KusuriPipeline(ClassifierMixin, BaseEstimator):
    """Prefilter selection followed by the ensemble; unselected tweets score 0."""

    def __init__(self, prefilter: Prefilter | None = None, ensemble: AveragingEnsemble | None = None):
        self.prefilter = prefilter
        self.ensemble = ensemble

    def fit(self, X, y):
        """Fit the ensemble on ``(X, y)``, normally a balanced candidate corpus."""
        self.ensemble.fit(X, y)
        self.prefilter.fit()
        self.classes_ = np.array([0, 1])
        return self

    def _scores(self, X) -> tuple[np.ndarray, np.ndarray]:
        if not hasattr(self.ensemble, "ensemble_"):
            raise NotFittedError("the ensemble is not fitted")
        tweets = check_texts(X)
        selected = self.prefilter.select(tweets)
        p = np.zeros(len(tweets))
        idx = np.flatnonzero(selected)
        if len(idx):
            p[idx] = self.ensemble._positive_proba([tweets[i] for i in idx])
        return p, selected

    def predict_proba(self, X) -> np.ndarray:
        p, _ = self._scores(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        p, selected = self._scores(X)
        labels = np.asarray(decide(p, self.ensemble.ensemble_.threshold)).reshape(-1)
        return np.where(selected, labels, 0)

