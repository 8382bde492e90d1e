"""Interventional coalition values and brute-force Shapley enumeration.

A coalition is encoded as a bitmask over features; bit ``j`` set means
feature ``j`` is taken from the explained row, otherwise from a background row.
"""

from math import factorial

import numpy as np

from ..exceptions import ConfigError

MAX_EXACT_FEATURES = 20
_MAX_HYBRID_ROWS = 1 << 16


def predict_fn(model):
    """Return a ``X -> predictions`` callable for estimators, ensembles or plain callables."""
    if hasattr(model, "predict"):
        return model.predict
    if callable(model):
        return model
    raise TypeError(f"cannot evaluate object of type {type(model).__name__}")


def mask_matrix(masks, d):
    """Boolean ``(len(masks), d)`` membership matrix for integer bitmasks."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(d)[None, :]) & 1).astype(bool)


def coalition_values(model, X, background, masks):
    """``v[i, k]``: mean model output over hybrids of ``X[i]`` and every background row
    that take the features in ``masks[k]`` from ``X[i]``.
    """
    f = predict_fn(model)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    B = np.atleast_2d(np.asarray(background, dtype=np.float64))
    n, d = X.shape
    m = B.shape[0]
    Z = mask_matrix(masks, d)
    K = Z.shape[0]
    out = np.empty((n, K))
    rows_per_chunk = max(1, _MAX_HYBRID_ROWS // (m * K))
    for start in range(0, n, rows_per_chunk):
        xs = X[start : start + rows_per_chunk]
        # hybrids[c, k, b, :] = where(Z[k], xs[c], B[b])
        hybrids = np.where(Z[None, :, None, :], xs[:, None, None, :], B[None, None, :, :])
        preds = np.asarray(f(hybrids.reshape(-1, d)), dtype=np.float64)
        out[start : start + rows_per_chunk] = preds.reshape(xs.shape[0], K, m).mean(axis=2)
    return out


def coalition_value(model, x, subset, background):
    """Background-marginalised model output when only ``subset`` comes from ``x``."""
    mask = 0
    for j in subset:
        mask |= 1 << int(j)
    return float(coalition_values(model, np.asarray(x)[None, :], background, [mask])[0, 0])


def shapley_weights(d):
    """``w[s] = s! (d - s - 1)! / d!`` for coalition sizes ``s = 0 .. d-1``."""
    return np.array([factorial(s) * factorial(d - s - 1) / factorial(d) for s in range(d)])


def shapley_from_values(v, d):
    """Combine a full table of coalition values ``v[:, mask]`` into Shapley values."""
    masks = np.arange(1 << d)
    sizes = np.array([bin(int(s)).count("1") for s in masks])
    w = shapley_weights(d)
    phi = np.empty((v.shape[0], d))
    for j in range(d):
        bit = 1 << j
        without = masks[(masks & bit) == 0]
        phi[:, j] = (v[:, without | bit] - v[:, without]) @ w[sizes[without]]
    return phi


def shapley_exact(model, X, background):
    """Exact interventional Shapley values by enumerating all ``2**d`` coalitions.

    ``X`` may be a single row or a matrix; the result has matching shape.
    Returns ``(phi, baseline)`` where ``baseline`` is the mean output over the
    background.
    """
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X2 = np.atleast_2d(X)
    d = X2.shape[1]
    if d > MAX_EXACT_FEATURES:
        raise ConfigError(f"exact enumeration is limited to {MAX_EXACT_FEATURES} features, got {d}; use the kernel engine")
    v = coalition_values(model, X2, background, np.arange(1 << d))
    phi = shapley_from_values(v, d)
    baseline = float(v[0, 0])
    return (phi[0] if single else phi), baseline
