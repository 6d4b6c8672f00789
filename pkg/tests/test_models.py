import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kusuri.models.checks import model_gradient_check, tiny_model
from kusuri.models.embeddings import (
    EmbeddingFormatError,
    EmbeddingTable,
    load_embeddings,
    write_embeddings,
)
from kusuri.models.networks import (
    KUSURI,
    WEAK,
    char_encode,
    forward_kusuri,
    forward_weak,
    predict_proba,
)
from kusuri.models.training import (
    TrainConfig,
    _evaluate,
    _split_xy,
    build_weak_training_set,
    init_params,
    load_model,
    save_model,
    stratified_dev_split,
    train,
    train_accuracy,
)
from kusuri.textcore import Corpus, LabeledTweet, Tweet, make_corpus

FORWARD = {KUSURI: forward_kusuri, WEAK: forward_weak}


def zero_head(params):
    arrays = dict(params.arrays)
    arrays["head.W"] = np.zeros_like(arrays["head.W"])
    arrays["head.b"] = np.zeros_like(arrays["head.b"])
    return params.with_arrays(arrays)


def toy_corpus(n=20):
    """Separable by construction: the two classes use disjoint vocabularies."""
    pos = ["took xanax", "advil for headache", "need my tylenol", "xanax and advil",
           "tylenol helps", "took advil", "more xanax please", "tylenol again",
           "advil advil", "xanax works"]
    neg = ["great game today", "pizza tonight", "love this song", "beach weekend",
           "game night", "song on repeat", "pizza party", "weekend plans", "great song",
           "beach day"]
    texts = pos[: n // 2] + neg[: n // 2]
    return make_corpus(texts, [1] * (n // 2) + [0] * (n // 2))


def toy_embeddings(corpus, dim=5, seed=0):
    rng = np.random.default_rng(seed)
    words = sorted({w for t in corpus.tweets for w in t.words})
    return EmbeddingTable.from_dict({w: rng.normal(size=dim) for w in words})


@pytest.mark.parametrize("arch", [KUSURI, WEAK])
def test_output_in_open_interval_and_zero_head(arch):
    params, emb, tweets, _ = tiny_model(arch, 3)
    for t in tweets:
        p = FORWARD[arch](params, emb, t)
        assert 0.0 < p < 1.0
        assert FORWARD[arch](zero_head(params), emb, t) == 0.5


@pytest.mark.parametrize("arch", [KUSURI, WEAK])
def test_wrong_architecture_rejected(arch):
    params, emb, tweets, _ = tiny_model(arch)
    other = forward_weak if arch == KUSURI else forward_kusuri
    with pytest.raises(ValueError):
        other(params, emb, tweets[0])


def test_empty_tweet_scores_zero():
    params, emb, _, _ = tiny_model(KUSURI)
    assert predict_proba(params, emb, [Tweet.from_raw("e", "   ")]).tolist() == [0.0]


@pytest.mark.parametrize("arch", [KUSURI, WEAK])
def test_isolation_from_other_instances(arch):
    a, emb, tweets, _ = tiny_model(arch, 0)
    b, _, _, _ = tiny_model(arch, 1)
    before = predict_proba(a, emb, tweets)
    rng = np.random.default_rng(9)
    for k, v in b.arrays.items():
        b.arrays[k] = rng.permutation(v.ravel()).reshape(v.shape)
    assert predict_proba(a, emb, tweets).tobytes() == before.tobytes()


@settings(max_examples=25)
@given(st.sampled_from([KUSURI, WEAK]), st.integers(0, 2**32 - 1))
def test_invariant_to_embeddings_of_absent_words(arch, seed):
    params, emb, tweets, _ = tiny_model(arch)
    tweet = tweets[1]  # "halls at school ugh"
    present = set(tweet.words)
    rng = np.random.default_rng(seed)
    vectors = emb.vectors.copy()
    for w, i in emb.index.items():
        if w not in present:
            vectors[i] = rng.normal(size=emb.dim) * 10
    changed = EmbeddingTable(emb.index, vectors)
    assert FORWARD[arch](params, changed, tweet) == FORWARD[arch](params, emb, tweet)


def test_char_encode_examples():
    params, _, _, _ = tiny_model(KUSURI)
    assert np.array_equal(char_encode(params, "xanax"), char_encode(params, "xanax"))
    zero = params.with_arrays({k: np.zeros_like(v) for k, v in params.arrays.items()})
    assert np.all(char_encode(zero, "xanax") == 0)
    assert np.all(np.isfinite(char_encode(params, "éé")))  # unseen chars map to unk
    with pytest.raises(ValueError):
        char_encode(params, "")


@pytest.mark.parametrize("arch", [KUSURI, WEAK])
def test_model_gradient_check(arch):
    err, where = model_gradient_check(arch)
    assert err < 1e-4, where


# -- weak labels -------------------------------------------------------------

def ten_tweets():
    texts = ["took xanax", "xanax again", "no xanax today", "game night", "pizza time",
             "cold rain", "love it", "so tired", "new song", "beach"]
    return make_corpus(texts)


def test_weak_set_example():
    weak = build_weak_training_set(ten_tweets(), ["xanax"], 0)
    labels = weak.labels
    assert labels.count(1) == 3 and labels.count(0) == 3
    assert len({t.id for t in weak.tweets}) == 6
    again = build_weak_training_set(ten_tweets(), ["xanax"], 0)
    assert [t.id for t in again.tweets] == [t.id for t in weak.tweets]


def test_weak_set_errors():
    with pytest.raises(ValueError, match="no positives"):
        build_weak_training_set(ten_tweets(), ["advil"], 0)
    with pytest.raises(ValueError):
        build_weak_training_set(make_corpus(["xanax", "xanax too", "hi"]), ["xanax"], 0)


@given(st.lists(st.sampled_from(["xanax now", "advil", "hello", "pizza", "so xanax",
                                 "game", "rain", "xanaxx"]), min_size=2, max_size=40),
       st.integers(0, 1000))
def test_weak_set_balanced_and_unique(texts, seed):
    corpus = make_corpus(texts)
    n_pos = sum("xanax" in t.split() for t in texts)
    if n_pos == 0 or len(texts) - n_pos < n_pos:
        with pytest.raises(ValueError):
            build_weak_training_set(corpus, ["xanax"], seed)
        return
    weak = build_weak_training_set(corpus, ["xanax"], seed)
    assert weak.labels.count(1) == weak.labels.count(0) == n_pos
    ids = [t.id for t in weak.tweets]
    assert len(ids) == len(set(ids))


# -- training ----------------------------------------------------------------

def test_overfit_toy_corpus():
    corpus = toy_corpus()
    emb = toy_embeddings(corpus)
    cfg = TrainConfig(epochs=200, batch_size=20, learning_rate=1e-2, dev_fraction=0.0,
                      char_dim=4, char_hidden=6, morph_dim=6, hidden=8)
    result = train(KUSURI, corpus, emb, cfg)
    assert train_accuracy(result.params, emb, corpus) == 1.0


def test_zero_epochs_returns_initialisation(tiny_config):
    corpus = toy_corpus()
    emb = toy_embeddings(corpus)
    cfg = tiny_config.replace(epochs=0)
    a = train(KUSURI, corpus, emb, cfg)
    b = train(KUSURI, corpus, emb, cfg.replace(epochs=3))
    assert a.history == []
    # the same seed draws the same initialisation before any update
    init = init_params(KUSURI, corpus.tweets, emb, cfg, np.random.default_rng(cfg.rng_seed))
    for k in init.arrays:
        assert a.params.arrays[k].tobytes() == init.arrays[k].tobytes()
    assert any(a.params.arrays[k].tobytes() != b.params.arrays[k].tobytes() for k in init.arrays)


@pytest.mark.parametrize("arch", [KUSURI, WEAK])
def test_training_is_bit_identical(arch, tiny_config):
    corpus = toy_corpus()
    emb = toy_embeddings(corpus)
    cfg = tiny_config.replace(dev_fraction=0.2, rng_seed=7)
    a, b = train(arch, corpus, emb, cfg), train(arch, corpus, emb, cfg)
    for k in a.params.arrays:
        assert a.params.arrays[k].tobytes() == b.params.arrays[k].tobytes()
    c = train(arch, corpus, emb, cfg.replace(rng_seed=8))
    assert any(a.params.arrays[k].tobytes() != c.params.arrays[k].tobytes() for k in a.params.arrays)


def test_single_class_corpus_rejected(tiny_config):
    corpus = make_corpus(["a b", "c d"], [1, 1])
    with pytest.raises(ValueError, match="both classes"):
        train(KUSURI, corpus, toy_embeddings(corpus), tiny_config)


def test_history_finite_and_best_epoch_minimal(tiny_config):
    corpus = toy_corpus()
    emb = toy_embeddings(corpus)
    cfg = tiny_config.replace(epochs=15, dev_fraction=0.3, patience=20, learning_rate=1e-2)
    result = train(KUSURI, corpus, emb, cfg)
    assert len(result.history) == 15
    assert all(np.isfinite(r.train_loss) and np.isfinite(r.dev_loss) for r in result.history)
    dev = [r.dev_loss for r in result.history]
    assert dev[result.best_epoch - 1] == min(dev)
    assert np.isfinite(_evaluate(result.params, emb, *_split_xy(corpus))[0])


def test_stratified_dev_split():
    y = np.array([0] * 30 + [1] * 10, dtype=float)
    tr, dev = stratified_dev_split(y, 0.1, np.random.default_rng(0))
    assert len(dev) == 4 and y[dev].sum() == 1
    assert sorted(np.concatenate([tr, dev]).tolist()) == list(range(40))


def test_train_config_validation():
    for bad in ({"epochs": -1}, {"batch_size": 0}, {"dev_fraction": 0.6}, {"learning_rate": 0}):
        with pytest.raises(ValueError):
            TrainConfig(**bad)


# -- persistence ---------------------------------------------------------------

@pytest.mark.parametrize("arch", [KUSURI, WEAK])
def test_checkpoint_predictions_bit_exact(arch):
    params, emb, tweets, _ = tiny_model(arch)
    buf = io.StringIO()
    save_model(params, buf)
    loaded = load_model(io.StringIO(buf.getvalue()))
    assert loaded.architecture == arch and loaded.char_vocab == params.char_vocab
    assert predict_proba(loaded, emb, tweets).tobytes() == predict_proba(params, emb, tweets).tobytes()
    again = io.StringIO()
    save_model(loaded, again)
    assert again.getvalue() == buf.getvalue()


def test_embedding_file_round_trip():
    text = "3 2\nxanax 0.5 -1\nadvil 1 2\nxanax 9 9\n"
    table = load_embeddings(io.StringIO(text))
    assert table.dim == 2 and len(table) == 2
    assert table.lookup("xanax").tolist() == [0.5, -1.0]
    assert table.lookup("zzz").tolist() == [0.75, 0.5]
    buf = io.StringIO()
    write_embeddings(table, buf)
    again = load_embeddings(io.StringIO(buf.getvalue()))
    assert again.vectors.tobytes() == table.vectors.tobytes()


@pytest.mark.parametrize("text, line", [
    ("a 1 2\nb 1 2 3\n", 2),
    ("2 3\na 1 2\n", 2),
    ("a 1 x\n", 1),
])
def test_embedding_errors_carry_line(text, line):
    with pytest.raises(EmbeddingFormatError) as err:
        load_embeddings(io.StringIO(text))
    assert err.value.line == line


def test_embedding_dimension_argument():
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(io.StringIO("a 1 2\n"), dim=3)
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(io.StringIO("\n"))
