"""Shapley-kernel weighted least squares (KernelSHAP).

The two efficiency constraints (empty coalition gives the baseline, full
coalition gives ``f(x)``) are imposed exactly by eliminating the last
feature's attribution before solving the regression.
"""

from itertools import combinations
from math import comb

import numpy as np

from ..exceptions import ConfigError, NumericError
from .exact import MAX_EXACT_FEATURES, coalition_values, mask_matrix

FULL = "full"


def kernel_weight(d, size):
    """Shapley kernel ``(d - 1) / (C(d, s) * s * (d - s))`` for ``0 < s < d``."""
    return (d - 1) / (comb(d, size) * size * (d - size))


def _full_design(d):
    masks = np.arange(1, (1 << d) - 1)
    sizes = mask_matrix(masks, d).sum(axis=1)
    weights = np.array([kernel_weight(d, int(s)) for s in sizes])
    return masks, weights


def _masks_of_size(d, s):
    return [sum(1 << j for j in c) for c in combinations(range(d), s)]


def _sampled_design(d, budget, rng):
    """Coalitions and regression weights for a budget below full enumeration.

    Whole size groups ``{s, d - s}`` are enumerated from the outside in while
    they fit, carrying their exact kernel weight. If not even sizes 1 and
    ``d - 1`` fit, the ``d`` singletons are enumerated instead, which keeps
    the constrained system at full rank for any budget of ``d + 2`` or more.
    Leftover slots are filled by sampling from the remaining sizes in
    proportion to their kernel mass; complements are drawn in pairs when the
    remaining sizes are closed under complement. Duplicates accumulate weight.
    """
    slots = budget - 2
    chosen, weights = [], []
    remaining = set(range(1, d))
    for s in range(1, d // 2 + 1):
        group = sorted({s, d - s})
        masks = [mk for size in group for mk in _masks_of_size(d, size)]
        if len(masks) > slots:
            break
        chosen += masks
        weights += [kernel_weight(d, bin(mk).count("1")) for mk in masks]
        remaining -= set(group)
        slots -= len(masks)
    if len(remaining) == d - 1:
        chosen += [1 << j for j in range(d)]
        weights += [kernel_weight(d, 1)] * d
        remaining.discard(1)
        slots -= d
    if not remaining or slots <= 0:
        return np.array(chosen), np.array(weights)

    sizes = np.array(sorted(remaining))
    mass = np.array([comb(d, int(s)) * kernel_weight(d, int(s)) for s in sizes])
    paired = all(d - s in remaining for s in sizes)
    n_draws = slots // 2 if paired else slots
    counts = {}
    for _ in range(max(1, n_draws)):
        s = int(rng.choice(sizes, p=mass / mass.sum()))
        members = rng.choice(d, size=s, replace=False)
        mask = int(np.sum(1 << members))
        for mk in (mask, ((1 << d) - 1) ^ mask) if paired else (mask,):
            counts[mk] = counts.get(mk, 0) + 1
    total = sum(counts.values())
    for mk in sorted(counts):
        chosen.append(mk)
        weights.append(mass.sum() * counts[mk] / total)
    return np.array(chosen), np.array(weights)


def kernel_shap(model, X, background, budget=FULL, seed=0):
    """KernelSHAP attributions for one row or a matrix of rows.

    ``budget`` counts evaluated coalitions including the empty and full ones;
    ``"full"`` enumerates all ``2**d`` and reproduces exact Shapley values.
    Returns ``(phi, baseline)``.
    """
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X2 = np.atleast_2d(X)
    d = X2.shape[1]
    if d < 2:
        raise ConfigError("KernelSHAP needs at least 2 features")
    n_full = 1 << d
    if budget == FULL or (budget is not None and budget != FULL and budget >= n_full):
        if d > MAX_EXACT_FEATURES:
            raise ConfigError(f"full enumeration is limited to {MAX_EXACT_FEATURES} features")
        masks, weights = _full_design(d)
    else:
        budget = int(budget)
        if budget < d + 2:
            raise NumericError(f"KernelSHAP budget {budget} is below the minimum of d + 2 = {d + 2} coalitions")
        masks, weights = _sampled_design(d, budget, np.random.default_rng(seed))

    v = coalition_values(model, X2, background, np.concatenate([[0, n_full - 1], masks]))
    base, full, vs = v[:, 0], v[:, 1], v[:, 2:]
    Z = mask_matrix(masks, d).astype(np.float64)
    total = full - base
    A = Z[:, :-1] - Z[:, -1:]
    rhs = (vs - base[:, None]).T - Z[:, -1:] * total[None, :]
    sw = np.sqrt(weights)[:, None]
    Aw = A * sw
    if np.linalg.matrix_rank(Aw) < d - 1:
        raise NumericError(f"KernelSHAP regression is rank deficient; use a budget of at least d + 2 = {d + 2} coalitions")
    head = np.linalg.lstsq(Aw, rhs * sw, rcond=None)[0].T  # (n, d-1)
    phi = np.column_stack([head, total - head.sum(axis=1)])
    baseline = float(base[0])
    return (phi[0] if single else phi), baseline
