"""Central finite differences, the oracle for the analytic backward passes."""

from __future__ import annotations

from typing import Callable

import numpy as np

# Gradient entries whose magnitude is below this are compared in absolute
# terms; central differences at eps=1e-5 carry ~1e-11 rounding noise.
REL_ERROR_FLOOR = 1e-6


def finite_diff_gradients(loss_fn: Callable[[dict], float], params: dict,
                          epsilon: float = 1e-5) -> dict:
    """Perturb every scalar of every parameter array by +/- ``epsilon``."""
    work = {k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()}
    grads = {}
    for name, arr in work.items():
        g = np.zeros_like(arr)
        flat, gflat = arr.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = loss_fn(work)
            flat[i] = orig - epsilon
            down = loss_fn(work)
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * epsilon)
        grads[name] = g
    return grads


def relative_error(analytic: np.ndarray, numeric: np.ndarray,
                   floor: float = REL_ERROR_FLOOR) -> np.ndarray:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def max_relative_error(analytic: dict, numeric: dict) -> tuple[float, str]:
    """Worst relative error over all parameters and the name where it occurs."""
    worst, where = 0.0, ""
    for name in numeric:
        if name not in analytic:
            raise KeyError(f"analytic gradient missing for {name!r}")
        err = relative_error(analytic[name], numeric[name])
        m = float(err.max()) if err.size else 0.0
        if m > worst or not where:
            worst, where = m, name
    return worst, where
