from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params: dict) -> "AdamState":
        return cls(0, {k: np.zeros_like(p) for k, p in params.items()},
                   {k: np.zeros_like(p) for k, p in params.items()})


def adam_step(params: dict, grads: dict, state: AdamState, lr: float = 1e-3,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """Bias-corrected Adam update; returns new ``(params, state)``.

    Inputs are left untouched.  Parameters without a gradient entry are
    copied through unchanged.
    """
    t = state.t + 1
    new_params, new_m, new_v = {}, {}, {}
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for name, p in params.items():
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        g = grads.get(name)
        if g is None:
            new_params[name], new_m[name], new_v[name] = p.copy(), m, v
            continue
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        new_params[name] = p - lr * (m / c1) / (np.sqrt(v / c2) + eps)
        new_m[name], new_v[name] = m, v
    return new_params, AdamState(t, new_m, new_v)


def clip_by_global_norm(grads: dict, max_norm: float | None) -> dict:
    if not max_norm:
        return grads
    norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm <= max_norm:
        return grads
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}
