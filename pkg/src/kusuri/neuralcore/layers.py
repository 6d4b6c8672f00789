"""Recurrent cells, attention and dense layers with explicit backward passes.

Sequence layers work on right-padded batches: inputs ``X`` of shape
``(B, T, d)`` and a boolean ``mask`` of shape ``(B, T)``.  At a masked
step the recurrent state is carried through unchanged, so padding never
influences a valid position in either direction.  Every ``*_forward``
returns its output plus a cache consumed by the matching ``*_backward``,
which returns the input gradient and a dict of parameter gradients keyed
like the parameter dict.

Matrices follow the ``(out, in)`` convention: a cell maps ``x`` to
``W @ x``; batched code computes ``X @ W.T``.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .functional import masked_softmax, sigmoid

Params = Mapping[str, np.ndarray]

GRU_KEYS = ("W_z", "W_r", "W_h", "U_z", "U_r", "U_h", "b_z", "b_r", "b_h")
LSTM_GATES = ("i", "f", "o", "g")
LSTM_KEYS = tuple(f"{k}_{g}" for g in LSTM_GATES for k in ("W", "U", "b"))
ATTENTION_KEYS = ("W", "b", "v")
DENSE_KEYS = ("W", "b")
ACTIVATIONS = ("identity", "tanh", "sigmoid")


class NonFiniteError(FloatingPointError):
    def __init__(self, layer: str):
        self.layer = layer
        super().__init__(f"non-finite values in layer {layer!r}")


def check_finite(layer: str, *arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteError(layer)


# -- initialisation ---------------------------------------------------------

def glorot(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    r = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-r, r, size=(out_dim, in_dim))


def init_gru(rng, input_dim: int, hidden: int) -> dict[str, np.ndarray]:
    p = {}
    for g in "zrh":
        p[f"W_{g}"] = glorot(rng, hidden, input_dim)
        p[f"U_{g}"] = glorot(rng, hidden, hidden)
        p[f"b_{g}"] = np.zeros(hidden)
    return p


def init_lstm(rng, input_dim: int, hidden: int) -> dict[str, np.ndarray]:
    p = {}
    for g in LSTM_GATES:
        p[f"W_{g}"] = glorot(rng, hidden, input_dim)
        p[f"U_{g}"] = glorot(rng, hidden, hidden)
        p[f"b_{g}"] = np.zeros(hidden)
    return p


def init_attention(rng, state_dim: int, att_dim: int) -> dict[str, np.ndarray]:
    return {
        "W": glorot(rng, att_dim, state_dim),
        "b": np.zeros(att_dim),
        "v": glorot(rng, 1, att_dim)[0],
    }


def init_dense(rng, in_dim: int, out_dim: int) -> dict[str, np.ndarray]:
    return {"W": glorot(rng, out_dim, in_dim), "b": np.zeros(out_dim)}


# -- single steps -------------------------------------------------------------

def _check_cell(P: Params, x: np.ndarray, h: np.ndarray, prefix: str) -> None:
    hidden, in_dim = P[f"W_{prefix}"].shape
    if x.shape[-1] != in_dim:
        raise ValueError(f"input width {x.shape[-1]} != expected {in_dim}")
    if h.shape[-1] != hidden:
        raise ValueError(f"state width {h.shape[-1]} != expected {hidden}")
    if x.ndim != h.ndim or (x.ndim == 2 and x.shape[0] != h.shape[0]):
        raise ValueError("input and state batch shapes differ")


def gru_step(P: Params, x, h) -> np.ndarray:
    """One GRU update; ``x`` and ``h`` are vectors or row-batched matrices."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    _check_cell(P, x, h, "z")
    z = sigmoid(x @ P["W_z"].T + h @ P["U_z"].T + P["b_z"])
    r = sigmoid(x @ P["W_r"].T + h @ P["U_r"].T + P["b_r"])
    hh = np.tanh(x @ P["W_h"].T + (r * h) @ P["U_h"].T + P["b_h"])
    return (1.0 - z) * h + z * hh


def lstm_step(P: Params, x, h, c) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    _check_cell(P, x, h, "i")
    if c.shape != h.shape:
        raise ValueError("cell and hidden state shapes differ")
    pre = {g: x @ P[f"W_{g}"].T + h @ P[f"U_{g}"].T + P[f"b_{g}"] for g in LSTM_GATES}
    i, f, o = sigmoid(pre["i"]), sigmoid(pre["f"]), sigmoid(pre["o"])
    g = np.tanh(pre["g"])
    c_new = f * c + i * g
    return o * np.tanh(c_new), c_new


# -- sequence layers ----------------------------------------------------------

def _steps(T: int, reverse: bool):
    return range(T - 1, -1, -1) if reverse else range(T)


def _flat(a: np.ndarray) -> np.ndarray:
    return a.reshape(-1, a.shape[-1])


def gru_forward(P: Params, X: np.ndarray, mask: np.ndarray, reverse: bool = False):
    B, T, _ = X.shape
    hidden = P["U_z"].shape[0]
    if X.shape[-1] != P["W_z"].shape[1]:
        raise ValueError(f"input width {X.shape[-1]} != expected {P['W_z'].shape[1]}")
    xz = X @ P["W_z"].T + P["b_z"]
    xr = X @ P["W_r"].T + P["b_r"]
    xh = X @ P["W_h"].T + P["b_h"]
    H = np.zeros((B, T, hidden))
    Z, R, HH, HP = (np.zeros((B, T, hidden)) for _ in range(4))
    h = np.zeros((B, hidden))
    for t in _steps(T, reverse):
        z = sigmoid(xz[:, t] + h @ P["U_z"].T)
        r = sigmoid(xr[:, t] + h @ P["U_r"].T)
        hh = np.tanh(xh[:, t] + (r * h) @ P["U_h"].T)
        hn = h + z * (hh - h)
        Z[:, t], R[:, t], HH[:, t], HP[:, t] = z, r, hh, h
        h = np.where(mask[:, t, None], hn, h)
        H[:, t] = h
    return H, (X, mask, reverse, Z, R, HH, HP)


def gru_backward(P: Params, dH: np.ndarray, cache):
    X, mask, reverse, Z, R, HH, HP = cache
    B, T, hidden = Z.shape
    DAz, DAr, DAh = (np.zeros_like(Z) for _ in range(3))
    dh = np.zeros((B, hidden))
    for t in _steps(T, not reverse):
        m = mask[:, t, None]
        z, r, hh, hp = Z[:, t], R[:, t], HH[:, t], HP[:, t]
        dtot = dH[:, t] + dh
        dhn = np.where(m, dtot, 0.0)
        dprev = np.where(m, 0.0, dtot)
        dz = dhn * (hh - hp)
        dprev += dhn * (1.0 - z)
        dah = dhn * z * (1.0 - hh * hh)
        drh = dah @ P["U_h"]
        dar = drh * hp * r * (1.0 - r)
        dprev += drh * r
        daz = dz * z * (1.0 - z)
        dprev += daz @ P["U_z"] + dar @ P["U_r"]
        DAz[:, t], DAr[:, t], DAh[:, t] = daz, dar, dah
        dh = dprev
    Xf, HPf = _flat(X), _flat(HP)
    RHf = _flat(R * HP)
    grads = {}
    for g, DA, hsrc in (("z", DAz, HPf), ("r", DAr, HPf), ("h", DAh, RHf)):
        DAf = _flat(DA)
        grads[f"W_{g}"] = DAf.T @ Xf
        grads[f"U_{g}"] = DAf.T @ hsrc
        grads[f"b_{g}"] = DAf.sum(axis=0)
    dX = DAz @ P["W_z"] + DAr @ P["W_r"] + DAh @ P["W_h"]
    return dX, grads


def lstm_forward(P: Params, X: np.ndarray, mask: np.ndarray, reverse: bool = False):
    B, T, _ = X.shape
    hidden = P["U_i"].shape[0]
    if X.shape[-1] != P["W_i"].shape[1]:
        raise ValueError(f"input width {X.shape[-1]} != expected {P['W_i'].shape[1]}")
    xs = {g: X @ P[f"W_{g}"].T + P[f"b_{g}"] for g in LSTM_GATES}
    gates = {g: np.zeros((B, T, hidden)) for g in LSTM_GATES}
    C, HP, CP = (np.zeros((B, T, hidden)) for _ in range(3))
    H = np.zeros((B, T, hidden))
    h = np.zeros((B, hidden))
    c = np.zeros((B, hidden))
    for t in _steps(T, reverse):
        i = sigmoid(xs["i"][:, t] + h @ P["U_i"].T)
        f = sigmoid(xs["f"][:, t] + h @ P["U_f"].T)
        o = sigmoid(xs["o"][:, t] + h @ P["U_o"].T)
        g = np.tanh(xs["g"][:, t] + h @ P["U_g"].T)
        cn = f * c + i * g
        hn = o * np.tanh(cn)
        for k, v in zip(LSTM_GATES, (i, f, o, g)):
            gates[k][:, t] = v
        C[:, t], HP[:, t], CP[:, t] = cn, h, c
        m = mask[:, t, None]
        h = np.where(m, hn, h)
        c = np.where(m, cn, c)
        H[:, t] = h
    return H, (X, mask, reverse, gates, C, HP, CP)


def lstm_backward(P: Params, dH: np.ndarray, cache):
    X, mask, reverse, gates, C, HP, CP = cache
    B, T, hidden = C.shape
    DA = {g: np.zeros((B, T, hidden)) for g in LSTM_GATES}
    dh = np.zeros((B, hidden))
    dc = np.zeros((B, hidden))
    for t in _steps(T, not reverse):
        m = mask[:, t, None]
        i, f, o, g = (gates[k][:, t] for k in LSTM_GATES)
        cn, cp = C[:, t], CP[:, t]
        dtot = dH[:, t] + dh
        dhn = np.where(m, dtot, 0.0)
        dh_prev = np.where(m, 0.0, dtot)
        dcn = np.where(m, dc, 0.0)
        dc_prev = np.where(m, 0.0, dc)
        tc = np.tanh(cn)
        dcn = dcn + dhn * o * (1.0 - tc * tc)
        dc_prev += dcn * f
        da = {
            "i": dcn * g * i * (1.0 - i),
            "f": dcn * cp * f * (1.0 - f),
            "o": dhn * tc * o * (1.0 - o),
            "g": dcn * i * (1.0 - g * g),
        }
        for k in LSTM_GATES:
            DA[k][:, t] = da[k]
            dh_prev += da[k] @ P[f"U_{k}"]
        dh, dc = dh_prev, dc_prev
    Xf, HPf = _flat(X), _flat(HP)
    grads = {}
    dX = np.zeros_like(X)
    for k in LSTM_GATES:
        DAf = _flat(DA[k])
        grads[f"W_{k}"] = DAf.T @ Xf
        grads[f"U_{k}"] = DAf.T @ HPf
        grads[f"b_{k}"] = DAf.sum(axis=0)
        dX += DA[k] @ P[f"W_{k}"]
    return dX, grads


_CELLS = {
    "gru": (gru_forward, gru_backward),
    "lstm": (lstm_forward, lstm_backward),
}


def rnn_forward(kind: str, P: Params, X, mask, reverse: bool = False):
    try:
        fwd, _ = _CELLS[kind]
    except KeyError:
        raise ValueError(f"unknown cell kind {kind!r}") from None
    return fwd(P, X, mask, reverse)


def rnn_backward(kind: str, P: Params, dH, cache):
    return _CELLS[kind][1](P, dH, cache)


def bidirectional_forward(kind: str, Pf: Params, Pb: Params, X, mask):
    Hf, cf = rnn_forward(kind, Pf, X, mask, reverse=False)
    Hb, cb = rnn_forward(kind, Pb, X, mask, reverse=True)
    return np.concatenate([Hf, Hb], axis=-1), (kind, Hf.shape[-1], cf, cb)


def bidirectional_backward(Pf: Params, Pb: Params, dH, cache):
    kind, hf, cf, cb = cache
    dXf, gf = rnn_backward(kind, Pf, dH[..., :hf], cf)
    dXb, gb = rnn_backward(kind, Pb, dH[..., hf:], cb)
    return dXf + dXb, gf, gb


def bidirectional_run(cell_kind: str, fwd_params: Params, bwd_params: Params, sequence):
    """Unbatched convenience: list of input vectors -> list of 2h-wide states."""
    seq = [np.asarray(x, dtype=np.float64) for x in sequence]
    if not seq:
        raise ValueError("empty sequence")
    X = np.stack(seq)[None]
    H, _ = bidirectional_forward(cell_kind, fwd_params, bwd_params, X,
                                 np.ones((1, len(seq)), dtype=bool))
    return list(H[0])


def attention_forward(P: Params, S: np.ndarray, mask: np.ndarray):
    """Additive attention: score_t = v . tanh(W s_t + b), softmax over valid t."""
    if S.shape[-1] != P["W"].shape[1]:
        raise ValueError(f"state width {S.shape[-1]} != expected {P['W'].shape[1]}")
    U = np.tanh(S @ P["W"].T + P["b"])
    alpha = masked_softmax(U @ P["v"], mask)
    ctx = np.einsum("bt,btn->bn", alpha, S)
    return alpha, ctx, (S, U, alpha)


def attention_backward(P: Params, dctx: np.ndarray, cache):
    S, U, alpha = cache
    dalpha = np.einsum("btn,bn->bt", S, dctx)
    dS = alpha[..., None] * dctx[:, None, :]
    de = alpha * (dalpha - np.sum(alpha * dalpha, axis=-1, keepdims=True))
    da = de[..., None] * P["v"] * (1.0 - U * U)
    daf = _flat(da)
    grads = {
        "W": daf.T @ _flat(S),
        "b": daf.sum(axis=0),
        "v": _flat(U).T @ de.reshape(-1),
    }
    dS += da @ P["W"]
    return dS, grads


def attention(P: Params, states):
    """Unbatched convenience: returns ``(weights, context)``."""
    S = np.asarray(states, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] == 0:
        raise ValueError("attention needs a non-empty sequence of state vectors")
    alpha, ctx, _ = attention_forward(P, S[None], np.ones((1, S.shape[0]), dtype=bool))
    return alpha[0], ctx[0]


def _activate(a: np.ndarray, activation: str) -> np.ndarray:
    if activation == "identity":
        return a
    if activation == "tanh":
        return np.tanh(a)
    if activation == "sigmoid":
        return sigmoid(a)
    raise ValueError(f"unknown activation {activation!r}")


def dense_forward(P: Params, x: np.ndarray, activation: str):
    if x.shape[-1] != P["W"].shape[1]:
        raise ValueError(f"input width {x.shape[-1]} != expected {P['W'].shape[1]}")
    y = _activate(x @ P["W"].T + P["b"], activation)
    return y, (x, y, activation)


def dense_backward(P: Params, dy: np.ndarray, cache):
    x, y, activation = cache
    if activation == "tanh":
        da = dy * (1.0 - y * y)
    elif activation == "sigmoid":
        da = dy * y * (1.0 - y)
    else:
        da = dy
    daf, xf = _flat(da), _flat(x)
    grads = {"W": daf.T @ xf, "b": daf.sum(axis=0)}
    return da @ P["W"], grads


def dense(P: Params, x, activation: str = "identity") -> np.ndarray:
    return dense_forward(P, np.asarray(x, dtype=np.float64), activation)[0]
