"""Interventional TreeSHAP for additive tree ensembles.

For one explained row ``x`` and one background row ``z``, a leaf is reachable
by a hybrid of the two exactly when, for every feature on its path, at least
one of ``x`` or ``z`` lies inside the leaf's interval. Such a leaf contributes
the game ``value * [A <= S and B & S == {}]``, where ``A`` holds the
features only ``x`` satisfies and ``B`` those only ``z`` satisfies. That game
has closed-form Shapley values:

    j in A:  value * (|A| - 1)! |B|! / (|A| + |B|)!
    j in B: -value * |A|! (|B| - 1)! / (|A| + |B|)!

Summing over leaves, trees (weighted) and background rows gives the exact
interventional Shapley values without enumerating coalitions.
"""

from math import factorial

import numpy as np

from ..exceptions import UsageError
from ..models._tree import Tree, TreeEnsemble

_MAX_CELLS = 1 << 22
PATTERN_MAX_FEATURES = 8


def as_ensemble(model):
    """Extract the additive tree structure from a model, or raise :class:`UsageError`."""
    if isinstance(model, TreeEnsemble):
        return model
    if isinstance(model, Tree):
        return TreeEnsemble(trees=(model,), weights=np.ones(1), base_score=0.0)
    est = getattr(model, "estimator", model)
    try:
        ens = est.ensemble_
    except AttributeError:
        raise UsageError(f"{type(est).__name__} is not an additive tree ensemble") from None
    if not isinstance(ens, TreeEnsemble):
        raise UsageError(f"{type(est).__name__}.ensemble_ is not a TreeEnsemble")
    return ens


def is_tree_model(model):
    try:
        as_ensemble(model)
    except UsageError:
        return False
    return True


def _leaf_table(ens, d):
    lowers, uppers, values = [], [], []
    for w, tree in zip(ens.weights, ens.trees):
        lo, hi, val = tree.leaf_boxes(d)
        lowers.append(lo)
        uppers.append(hi)
        values.append(w * val)
    return np.concatenate(lowers), np.concatenate(uppers), np.concatenate(values)


def _coefficient_tables(d):
    pos = np.zeros((d + 1, d + 1))
    neg = np.zeros((d + 1, d + 1))
    for a in range(d + 1):
        for b in range(d + 1 - a):
            if a >= 1:
                pos[a, b] = factorial(a - 1) * factorial(b) / factorial(a + b)
            if b >= 1:
                neg[a, b] = -factorial(a) * factorial(b - 1) / factorial(a + b)
    return pos, neg


def _pattern_table(d):
    """``T[p, q, j]``: per-unit-value attribution to ``j`` when the explained row's
    in-interval pattern over features is bitmask ``p`` and the background's is ``q``.
    """
    pos, neg = _coefficient_tables(d)
    full = (1 << d) - 1
    p = np.arange(1 << d)[:, None]
    q = np.arange(1 << d)[None, :]
    reach = (p | q) == full
    only_x = p & ~q
    only_z = q & ~p
    bits = 1 << np.arange(d)
    ox = (only_x[..., None] & bits) != 0
    oz = (only_z[..., None] & bits) != 0
    a = ox.sum(axis=2)
    b = oz.sum(axis=2)
    T = ox * pos[a, b][..., None] + oz * neg[a, b][..., None]
    return np.where(reach[..., None], T, 0.0)


def _phi_by_patterns(inside_x, inside_z, val, d):
    bits = 1 << np.arange(d)
    px = (inside_x * bits).sum(axis=2)  # (n, L)
    pz = (inside_z * bits).sum(axis=2)  # (m, L)
    table = _pattern_table(d)
    n_pat = 1 << d
    L = val.shape[0]
    phi = np.zeros((inside_x.shape[0], d))
    block = max(1, _MAX_CELLS // (n_pat * d))
    for start in range(0, L, block):
        stop = min(L, start + block)
        leaves = np.arange(stop - start)
        counts = np.zeros((stop - start, n_pat))
        np.add.at(counts, (np.broadcast_to(leaves, pz[:, start:stop].shape), pz[:, start:stop]), 1.0)
        # per leaf and explained pattern, the background-summed attribution vector
        G = np.einsum("lq,pqj->lpj", counts * val[start:stop, None], table)
        phi += G[leaves[None, :], px[:, start:stop]].sum(axis=1)
    return phi / inside_z.shape[0]


def _phi_by_pairs(inside_x, inside_z, val, d):
    n, m, L = inside_x.shape[0], inside_z.shape[0], val.shape[0]
    pos, neg = _coefficient_tables(d)
    phi = np.zeros((n, d))
    bg_chunk = max(1, _MAX_CELLS // (L * d))
    for i in range(n):
        sx = inside_x[i]
        acc = np.zeros(d)
        for start in range(0, m, bg_chunk):
            sz = inside_z[start : start + bg_chunk]
            only_x = sx[None] & ~sz
            only_z = sz & ~sx[None]
            reach = np.all(sx[None] | sz, axis=2)
            a = only_x.sum(axis=2)
            b = only_z.sum(axis=2)
            scale = np.where(reach, val[None, :], 0.0)
            acc += np.einsum("bl,bld->d", scale * pos[a, b], only_x)
            acc += np.einsum("bl,bld->d", scale * neg[a, b], only_z)
        phi[i] = acc / m
    return phi


def tree_shap(model, X, background, method="auto"):
    """Exact interventional Shapley values of a tree ensemble.

    ``method="patterns"`` aggregates background rows per leaf by their
    in-interval bit pattern (cost grows as ``4**d``); ``"pairs"`` loops over
    explained/background pairs. ``"auto"`` uses patterns up to
    ``PATTERN_MAX_FEATURES`` features. Returns ``(phi, baseline)``; ``phi``
    has the shape of ``X`` (row or matrix).
    """
    ens = as_ensemble(model)
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X2 = np.atleast_2d(X)
    B = np.atleast_2d(np.asarray(background, dtype=np.float64))
    d = X2.shape[1]
    lo, hi, val = _leaf_table(ens, d)
    inside_x = (X2[:, None, :] > lo) & (X2[:, None, :] <= hi)  # (n, L, d)
    inside_z = (B[:, None, :] > lo) & (B[:, None, :] <= hi)  # (m, L, d)
    if method == "auto":
        method = "patterns" if d <= PATTERN_MAX_FEATURES else "pairs"
    if method == "patterns":
        phi = _phi_by_patterns(inside_x, inside_z, val, d)
    elif method == "pairs":
        phi = _phi_by_pairs(inside_x, inside_z, val, d)
    else:
        raise UsageError(f"unknown tree_shap method {method!r}")
    baseline = float(np.mean(ens.predict(B)))
    return (phi[0] if single else phi), baseline
