import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kusuri.neuralcore import layers as L
from kusuri.neuralcore.checkpoint import CheckpointError, dump_checkpoint, read_checkpoint
from kusuri.neuralcore.functional import bce_loss, masked_softmax, sigmoid, softmax
from kusuri.neuralcore.gradcheck import finite_diff_gradients, max_relative_error, relative_error
from kusuri.neuralcore.optim import AdamState, adam_step, clip_by_global_norm

TOL = 1e-4


def zeros(P):
    return {k: np.zeros_like(v) for k, v in P.items()}


def perturbed(P, rng, scale=0.3):
    return {k: v + scale * rng.normal(size=v.shape) for k, v in P.items()}


def random_mask(rng, B, T):
    lengths = rng.integers(1, T + 1, size=B)
    return np.arange(T)[None, :] < lengths[:, None]


# -- functional --------------------------------------------------------------

def test_activation_examples():
    assert sigmoid(0.0) == 0.5
    np.testing.assert_allclose(softmax([2.0, 2.0, 2.0]), [1 / 3] * 3, rtol=0, atol=1e-15)
    big = softmax([1000.0, 0.0])
    assert np.all(np.isfinite(big)) and big[0] == pytest.approx(1.0) and big[1] < 1e-300
    assert np.isfinite(sigmoid(np.array([-1e4, 1e4]))).all()


def test_bce_values():
    assert float(bce_loss(0.9, 0)) == pytest.approx(-math.log(0.1), abs=1e-12)
    assert float(bce_loss(0.9, 0)) == pytest.approx(2.302585, abs=1e-6)
    assert np.isfinite(bce_loss(np.array([0.0, 1.0]), np.array([1, 0]))).all()


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=12), st.randoms())
def test_softmax_sums_to_one_and_is_equivariant(values, rnd):
    v = np.array(values)
    p = softmax(v)
    assert abs(p.sum() - 1.0) <= 1e-12
    perm = list(range(len(v)))
    rnd.shuffle(perm)
    np.testing.assert_allclose(softmax(v[perm]), p[perm], rtol=0, atol=1e-15)


def test_masked_softmax_ignores_padding():
    s = np.array([[1.0, 2.0, 99.0]])
    a = masked_softmax(s, np.array([[True, True, False]]))
    np.testing.assert_allclose(a, [[*softmax([1.0, 2.0]), 0.0]])


# -- cells -------------------------------------------------------------------

def test_gru_step_examples(rng):
    P = zeros(L.init_gru(rng, 3, 1))
    x = rng.normal(size=3)
    assert L.gru_step(P, x, np.zeros(1)) == pytest.approx([0.0])
    assert L.gru_step(P, x, np.ones(1)) == pytest.approx([0.5])
    hold = dict(P, b_z=np.full(1, -50.0))
    h = np.array([0.7])
    assert L.gru_step(hold, x, h) == pytest.approx(h, abs=1e-12)


def test_lstm_step_examples(rng):
    P = zeros(L.init_lstm(rng, 3, 2))
    h2, c2 = L.lstm_step(P, rng.normal(size=3), np.zeros(2), np.zeros(2))
    assert np.all(h2 == 0) and np.all(c2 == 0)
    hold = dict(perturbed(L.init_lstm(rng, 3, 2), rng), b_f=np.full(2, 50.0), b_i=np.full(2, -50.0))
    c = np.array([0.3, -1.2])
    _, c_next = L.lstm_step(hold, rng.normal(size=3), np.array([0.1, 0.2]), c)
    np.testing.assert_allclose(c_next, c, atol=1e-12)
    with pytest.raises(ValueError):
        L.lstm_step(P, np.zeros(4), np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        L.gru_step(zeros(L.init_gru(rng, 3, 2)), np.zeros(3), np.zeros(5))


def test_sequence_matches_stepwise(rng):
    P = perturbed(L.init_gru(rng, 3, 4), rng)
    X = rng.normal(size=(1, 5, 3))
    H, _ = L.gru_forward(P, X, np.ones((1, 5), dtype=bool))
    h = np.zeros(4)
    for t in range(5):
        h = L.gru_step(P, X[0, t], h)
        np.testing.assert_allclose(H[0, t], h, atol=1e-14)


@pytest.mark.parametrize("kind", ["gru", "lstm"])
def test_padding_does_not_leak(kind, rng):
    init = L.init_gru if kind == "gru" else L.init_lstm
    P = perturbed(init(rng, 3, 4), rng)
    X = rng.normal(size=(1, 3, 3))
    padded = np.concatenate([X, rng.normal(size=(1, 2, 3))], axis=1)
    mask = np.array([[True, True, True, False, False]])
    for reverse in (False, True):
        H, _ = L.rnn_forward(kind, P, X, np.ones((1, 3), dtype=bool), reverse)
        Hp, _ = L.rnn_forward(kind, P, padded, mask, reverse)
        np.testing.assert_allclose(Hp[0, :3], H[0], atol=1e-14)


def test_bidirectional_examples(rng):
    Pf = perturbed(L.init_gru(rng, 2, 3), rng)
    Pb = perturbed(L.init_gru(rng, 2, 3), rng)
    x = rng.normal(size=2)
    (out,) = L.bidirectional_run("gru", Pf, Pb, [x])
    np.testing.assert_allclose(out, np.concatenate([L.gru_step(Pf, x, np.zeros(3)),
                                                    L.gru_step(Pb, x, np.zeros(3))]))
    seq = list(rng.normal(size=(4, 2)))
    fwd = L.bidirectional_run("gru", Pf, Pb, seq)
    rev = L.bidirectional_run("gru", Pb, Pf, seq[::-1])[::-1]
    for a, b in zip(fwd, rev):
        np.testing.assert_allclose(a, np.concatenate([b[3:], b[:3]]), atol=1e-14)
    Z = L.bidirectional_run("gru", zeros(Pf), zeros(Pb), seq)
    assert all(np.all(z == 0) for z in Z)


# -- attention ---------------------------------------------------------------

def test_attention_examples(rng):
    P = perturbed(L.init_attention(rng, 3, 3), rng)
    s = rng.normal(size=3)
    alpha, ctx = L.attention(P, [s, s, s])
    np.testing.assert_allclose(alpha, [1 / 3] * 3)
    np.testing.assert_allclose(ctx, s)
    alpha, ctx = L.attention(P, [s])
    assert alpha.tolist() == [1.0]
    np.testing.assert_allclose(ctx, s)
    flat = dict(P, v=np.zeros(3))
    alpha, _ = L.attention(flat, rng.normal(size=(5, 3)))
    np.testing.assert_allclose(alpha, [0.2] * 5)


@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_attention_context_in_convex_hull(T, n, seed):
    rng = np.random.default_rng(seed)
    P = perturbed(L.init_attention(rng, n, n), rng, 1.0)
    S = rng.normal(size=(T, n))
    alpha, ctx = L.attention(P, S)
    assert np.all(alpha >= 0) and abs(alpha.sum() - 1) < 1e-12
    assert np.all(ctx <= S.max(axis=0) + 1e-12) and np.all(ctx >= S.min(axis=0) - 1e-12)


# -- gradient fidelity ---------------------------------------------------------

def _check_layer(forward, backward, P, X, rng):
    out, cache = forward(P, X)
    R = rng.normal(size=out.shape)
    dX, grads = backward(P, R, cache)

    def loss(params):
        return float(np.sum(forward(params, X)[0] * R))

    numeric = finite_diff_gradients(loss, P)
    worst, where = max_relative_error(grads, numeric)
    assert worst < TOL, (worst, where)
    nX = finite_diff_gradients(lambda d: float(np.sum(forward(P, d["X"])[0] * R)), {"X": X})["X"]
    assert float(relative_error(dX, nX).max()) < TOL


@given(st.sampled_from(["gru", "lstm"]), st.booleans(), st.integers(1, 3), st.integers(1, 5),
       st.integers(0, 2**32 - 1))
def test_recurrent_gradients(kind, reverse, B, T, seed):
    rng = np.random.default_rng(seed)
    init = L.init_gru if kind == "gru" else L.init_lstm
    P = perturbed(init(rng, 3, 4), rng)
    X = rng.normal(size=(B, T, 3))
    mask = random_mask(rng, B, T)
    _check_layer(lambda p, x: L.rnn_forward(kind, p, x, mask, reverse),
                 lambda p, d, c: L.rnn_backward(kind, p, d, c), P, X, rng)


@given(st.integers(1, 3), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_bidirectional_gradients(B, T, seed):
    rng = np.random.default_rng(seed)
    Pf = perturbed(L.init_gru(rng, 2, 3), rng)
    Pb = perturbed(L.init_gru(rng, 2, 3), rng)
    P = {**{f"f.{k}": v for k, v in Pf.items()}, **{f"b.{k}": v for k, v in Pb.items()}}
    X = rng.normal(size=(B, T, 2))
    mask = random_mask(rng, B, T)

    def split(p):
        return ({k[2:]: v for k, v in p.items() if k.startswith("f.")},
                {k[2:]: v for k, v in p.items() if k.startswith("b.")})

    def fwd(p, x):
        return L.bidirectional_forward("gru", *split(p), x, mask)

    def bwd(p, d, c):
        dX, gf, gb = L.bidirectional_backward(*split(p), d, c)
        return dX, {**{f"f.{k}": v for k, v in gf.items()}, **{f"b.{k}": v for k, v in gb.items()}}

    _check_layer(fwd, bwd, P, X, rng)


@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_attention_gradients(B, T, seed):
    rng = np.random.default_rng(seed)
    P = perturbed(L.init_attention(rng, 4, 3), rng, 1.0)
    X = rng.normal(size=(B, T, 4))
    mask = random_mask(rng, B, T)

    def fwd(p, s):
        alpha, ctx, cache = L.attention_forward(p, s, mask)
        return ctx, cache

    _check_layer(fwd, L.attention_backward, P, X, rng)


@pytest.mark.parametrize("activation", ["identity", "tanh", "sigmoid"])
def test_dense_gradients(activation, rng):
    P = perturbed(L.init_dense(rng, 4, 3), rng)
    X = rng.normal(size=(5, 4))
    _check_layer(lambda p, x: L.dense_forward(p, x, activation), L.dense_backward, P, X, rng)


def test_relative_error_floor():
    assert relative_error(np.array([1e-9]), np.array([0.0]))[0] == pytest.approx(1e-3)
    assert relative_error(np.array([2.0]), np.array([1.0]))[0] == pytest.approx(0.5)


@given(st.sampled_from(["gru", "lstm"]), st.integers(0, 2**32 - 1))
def test_forward_passes_stay_finite(kind, seed):
    rng = np.random.default_rng(seed)
    init = L.init_gru if kind == "gru" else L.init_lstm
    P = perturbed(init(rng, 3, 4), rng, 10.0)
    H, _ = L.rnn_forward(kind, P, 100 * rng.normal(size=(2, 6, 3)), np.ones((2, 6), bool))
    assert np.isfinite(H).all()


# -- optimizer -----------------------------------------------------------------

def test_adam_first_step_moves_by_lr():
    params = {"w": np.array([1.0, -2.0, 0.5])}
    grads = {"w": np.array([0.3, -4.0, 1e-3])}
    state = AdamState.zeros_like(params)
    new, st2 = adam_step(params, grads, state, lr=1e-3)
    np.testing.assert_allclose(params["w"] - new["w"], 1e-3 * np.sign(grads["w"]), rtol=1e-4)
    assert st2.t == 1 and state.t == 0
    assert params["w"].tolist() == [1.0, -2.0, 0.5]


def test_adam_matches_reference_two_steps():
    p = np.array([0.5])
    g1, g2 = np.array([0.2]), np.array([-0.1])
    b1, b2, lr, eps = 0.9, 0.999, 0.01, 1e-8
    m = (1 - b1) * g1
    v = (1 - b2) * g1 ** 2
    ref = p - lr * (m / (1 - b1)) / (np.sqrt(v / (1 - b2)) + eps)
    m = b1 * m + (1 - b1) * g2
    v = b2 * v + (1 - b2) * g2 ** 2
    ref = ref - lr * (m / (1 - b1 ** 2)) / (np.sqrt(v / (1 - b2 ** 2)) + eps)
    params, state = {"p": p}, AdamState.zeros_like({"p": p})
    for g in (g1, g2):
        params, state = adam_step(params, {"p": g}, state, lr=lr)
    np.testing.assert_allclose(params["p"], ref, rtol=1e-14)


def test_global_norm_clipping():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    clipped = clip_by_global_norm(grads, 1.0)
    assert math.hypot(clipped["a"][0], clipped["b"][0]) == pytest.approx(1.0)
    assert clip_by_global_norm(grads, 10.0) is grads
    assert clip_by_global_norm(grads, None) is grads


# -- checkpoints ---------------------------------------------------------------

def test_checkpoint_round_trip_is_bit_exact(rng):
    params = {"w": rng.normal(size=(3, 4)), "b": np.array([1 / 3, -0.0, 5e-324, 1e300])}
    buf = io.StringIO()
    dump_checkpoint(buf, "kusuri-dnn", {"hidden": 4}, params, {"note": "x"})
    doc = read_checkpoint(io.StringIO(buf.getvalue()))
    assert doc["architecture"] == "kusuri-dnn" and doc["note"] == "x"
    for k, v in params.items():
        assert doc["params"][k].tobytes() == v.tobytes()


def test_checkpoint_rejects_bad_documents():
    with pytest.raises(CheckpointError):
        read_checkpoint(io.StringIO("{}"))
    with pytest.raises(CheckpointError):
        read_checkpoint(io.StringIO("not json"))
    with pytest.raises(ValueError):
        dump_checkpoint(io.StringIO(), "x", {}, {"w": np.array([np.nan])})


def test_adam_zero_gradients_leave_params():
    params = {"w": np.array([0.25, -1.5])}
    new, state = adam_step(params, {"w": np.zeros(2)}, AdamState.zeros_like(params))
    assert new["w"].tolist() == [0.25, -1.5] and state.t == 1
    new, _ = adam_step({"p": np.array([0.0])}, {"p": np.array([1.0])},
                       AdamState.zeros_like({"p": np.zeros(1)}), lr=1e-3)
    assert new["p"][0] == pytest.approx(-1e-3, rel=1e-4)
