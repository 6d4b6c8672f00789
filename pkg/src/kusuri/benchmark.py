"""End-to-end run on synthetic data: build every component, compare three systems.

The workflow follows the corpus-construction recipe: weak labels from seed
names train the LSTM filter; the four filters nominate gold candidates
from a timeline pool; the candidates, labelled with their true class and
balanced, train the ensemble.  The three systems are then scored on an
unbalanced natural corpus: the lexicon+variant baseline, the ensemble
applied to every tweet, and the full two-module pipeline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .datasets import NATURAL_MIX, TIMELINE_MIX, make_world
from .ensemble import train_ensemble
from .evaluation import PrfMetrics, confusion, prf
from .models.networks import WEAK, Predictor
from .models.training import TrainConfig, build_weak_training_set, train
from .pipeline import (
    EXCLUDED,
    build_gold_candidates,
    classify_corpus,
    ensemble_only,
    lexicon_variant_baseline,
)
from .prefilter.verdict import run_filters_batch
from .textcore import Corpus, LabeledTweet, dedup
from .variantgen import VariantConfig, build_variant_lexicon

log = logging.getLogger(__name__)

BENCH_CONFIG = TrainConfig(epochs=8, batch_size=32, learning_rate=3e-3, dev_fraction=0.1,
                           patience=2, char_dim=8, char_hidden=16, morph_dim=16, hidden=16)
WEAK_CONFIG = TrainConfig(epochs=12, batch_size=32, learning_rate=3e-3, dev_fraction=0.1,
                          patience=3, hidden=16)


@dataclass
class BenchmarkResult:
    metrics: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    natural: Corpus | None = None
    records: list = field(default_factory=list)
    categories: list = field(default_factory=list)
    module2: list = field(default_factory=list)


def balance(corpus: Corpus, rng: np.random.Generator, max_per_class: int | None = None) -> Corpus:
    pos = [it for it in corpus.items if it.label == 1]
    neg = [it for it in corpus.items if it.label == 0]
    n = min(len(pos), len(neg))
    if max_per_class:
        n = min(n, max_per_class)
    keep = set()
    for group in (pos, neg):
        keep.update(id(group[i]) for i in rng.choice(len(group), size=n, replace=False))
    return Corpus([it for it in corpus.items if id(it) in keep], corpus.provenance)


def run_benchmark(random_state: int = 0, n_natural: int = 50_000, n_timeline: int = 20_000,
                  k: int = 9, config: TrainConfig = BENCH_CONFIG,
                  weak_config: TrainConfig = WEAK_CONFIG, max_per_class: int = 1200,
                  threads: int = 1) -> BenchmarkResult:
    world = make_world(random_state)
    rng = np.random.default_rng(random_state)
    emb = world.embeddings
    result = BenchmarkResult()

    timeline, _ = world.sample(n_timeline, TIMELINE_MIX, rng, "tl")
    timeline = dedup(timeline)
    weak_set = build_weak_training_set(Corpus(timeline.tweets), world.seeds, random_state)
    weak = train(WEAK, weak_set, emb, weak_config.replace(rng_seed=random_state)).params
    weak_model = Predictor(weak, emb)

    variants = build_variant_lexicon(world.lexicon, VariantConfig(common_words=world.common_words))
    verdicts = run_filters_batch(timeline.tweets, world.lexicon, variants, world.patterns, weak_model)
    candidates = build_gold_candidates(timeline, verdicts)
    # simulated annotation: candidates receive their true label
    gold = [item for item, cand in zip(timeline.items, candidates)
            if cand.proposed_label != EXCLUDED]
    drug_corpus = balance(Corpus(gold, "synthetic drug corpus"), rng, max_per_class)
    log.info("timeline %d, weak set %d, candidates %d, drug corpus %d",
             len(timeline), len(weak_set), len(gold), len(drug_corpus))

    seeds = [random_state * 1000 + i for i in range(k)]
    ensemble = train_ensemble(drug_corpus, emb, config, seeds, threads=threads)

    natural, categories = world.sample(n_natural, NATURAL_MIX, rng, "nat")
    gold_labels = [it.label for it in natural.items]

    baseline = lexicon_variant_baseline(natural, world.lexicon, variants)
    module2, _ = ensemble_only(natural, ensemble, emb)
    records = classify_corpus(natural, world.lexicon, variants, world.patterns, weak_model,
                              ensemble, emb)
    full = [r.label for r in records]

    def score(pred) -> PrfMetrics:
        return prf(confusion(pred, gold_labels))

    result.metrics = {
        "lexicon_variant": score(baseline),
        "module2_only": score(module2),
        "kusuri": score(full),
    }
    result.sizes = {
        "timeline": len(timeline), "weak_train": len(weak_set), "candidates": len(gold),
        "drug_corpus": len(drug_corpus), "natural": len(natural),
        "natural_positives": int(sum(gold_labels)),
        "selected": sum(1 for r in records if r.probability is not None),
    }
    result.natural = natural
    result.records = records
    result.categories = categories
    result.module2 = module2
    return result
