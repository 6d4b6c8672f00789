"""Drug-mention detection in tweets: cheap lexical filters feeding a neural ensemble."""

from .ensemble import Ensemble, ensemble_predict, ensemble_predict_many, train_ensemble
from .estimators import AveragingEnsemble, KusuriClassifier, KusuriPipeline, Prefilter
from .evaluation import cohen_kappa, confusion, f1_from_pr, mcnemar, prf
from .pipeline import classify_corpus, select_candidates
from .textcore import Corpus, LabeledTweet, Tweet, load_corpus, make_corpus, normalize, tokenize

__version__ = "0.1.0"

__all__ = [
    "AveragingEnsemble",
    "Corpus",
    "Ensemble",
    "KusuriClassifier",
    "KusuriPipeline",
    "LabeledTweet",
    "Prefilter",
    "Tweet",
    "classify_corpus",
    "cohen_kappa",
    "confusion",
    "ensemble_predict",
    "ensemble_predict_many",
    "f1_from_pr",
    "load_corpus",
    "make_corpus",
    "mcnemar",
    "normalize",
    "prf",
    "select_candidates",
    "tokenize",
    "train_ensemble",
]
