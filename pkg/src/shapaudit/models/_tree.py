"""Array-backed regression trees and the greedy builder shared by all tree models.

Every tree is grown on a residual vector ``r`` with unit hessians, so a leaf
holding samples ``I`` gets the value ``sum(r[I]) / (|I| + reg_lambda)`` and a
split's gain is

    0.5 * (G_L**2 / (H_L + lam) + G_R**2 / (H_R + lam) - G**2 / (H + lam)) - gamma

With ``reg_lambda = gamma = 0`` this is half the squared-error reduction and
the leaf value is the mean, i.e. plain CART.
"""

import heapq
from dataclasses import dataclass

import numpy as np

_LEAF = -1
_GAIN_TOL = 1e-12


@dataclass(frozen=True)
class Tree:
    """Binary regression tree stored as parallel node arrays.

    ``feature[i] == -1`` marks a leaf. Samples with
    ``x[feature[i]] <= threshold[i]`` go to ``left[i]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def constant(cls, value):
        return cls(
            feature=np.array([_LEAF]),
            threshold=np.array([np.nan]),
            left=np.array([_LEAF]),
            right=np.array([_LEAF]),
            value=np.array([float(value)]),
        )

    @property
    def node_count(self):
        return self.feature.shape[0]

    @property
    def n_leaves(self):
        return int(np.sum(self.feature == _LEAF))

    @property
    def max_depth(self):
        depth = np.zeros(self.node_count, dtype=int)
        for i in range(self.node_count):
            if self.feature[i] != _LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X):
        """Index of the leaf each row of ``X`` lands in."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = np.flatnonzero(self.feature[node] != _LEAF)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != _LEAF]
        return node

    def predict(self, X):
        return self.value[self.apply(X)]

    def leaf_boxes(self, n_features):
        """Axis-aligned region of every leaf.

        Returns ``(lower, upper, values)`` where leaf ``l`` is reached exactly
        when ``lower[l, j] < x[j] <= upper[l, j]`` for all ``j``.
        """
        lowers, uppers, values = [], [], []
        stack = [(0, np.full(n_features, -np.inf), np.full(n_features, np.inf))]
        while stack:
            node, lo, hi = stack.pop()
            f = self.feature[node]
            if f == _LEAF:
                lowers.append(lo)
                uppers.append(hi)
                values.append(self.value[node])
                continue
            t = self.threshold[node]
            hi_left = hi.copy()
            hi_left[f] = min(hi[f], t)
            lo_right = lo.copy()
            lo_right[f] = max(lo[f], t)
            stack.append((self.right[node], lo_right, hi))
            stack.append((self.left[node], lo, hi_left))
        return np.array(lowers), np.array(uppers), np.array(values)


@dataclass(frozen=True)
class TreeEnsemble:
    """Additive model ``base_score + sum_m weights[m] * trees[m](x)``."""

    trees: tuple
    weights: np.ndarray
    base_score: float = 0.0

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.full(X.shape[0], float(self.base_score))
        for w, tree in zip(self.weights, self.trees):
            out += w * tree.predict(X)
        return out

    def __add__(self, other):
        return TreeEnsemble(
            trees=self.trees + other.trees,
            weights=np.concatenate([self.weights, other.weights]),
            base_score=self.base_score + other.base_score,
        )


def quantile_bin_edges(X, max_bins):
    """Per-feature candidate thresholds for histogram split finding.

    Features with at most ``max_bins`` distinct values keep every midpoint;
    others get ``max_bins - 1`` interior quantiles.
    """
    edges = []
    for col in X.T:
        distinct = np.unique(col)
        if distinct.size <= max_bins:
            e = 0.5 * (distinct[:-1] + distinct[1:])
        else:
            qs = np.linspace(0, 100, max_bins + 1)[1:-1]
            e = np.unique(np.percentile(col, qs, method="midpoint"))
        edges.append(e)
    return edges


@dataclass
class _Split:
    gain: float
    feature: int
    threshold: float
    left_mask: np.ndarray


class TreeBuilder:
    """Greedy split search with depth-wise or best-first growth."""

    def __init__(
        self,
        max_depth=None,
        min_samples_leaf=1,
        max_leaves=None,
        reg_lambda=0.0,
        gamma=0.0,
        max_features=None,
        bin_edges=None,
        rng=None,
    ):
        self.max_depth = max_depth
        self.min_samples_leaf = max(1, int(min_samples_leaf))
        self.max_leaves = max_leaves
        self.reg_lambda = float(reg_lambda)
        self.gamma = float(gamma)
        self.max_features = max_features
        self.bin_edges = bin_edges
        self.rng = rng

    def _leaf_value(self, r):
        return r.sum() / (r.shape[0] + self.reg_lambda)

    def _score(self, g, h):
        return g * g / (h + self.reg_lambda)

    def _candidate_features(self, d):
        if self.max_features is None or self.max_features >= d:
            return range(d)
        return np.sort(self.rng.choice(d, size=self.max_features, replace=False))

    def _best_split(self, X, r, idx):
        m = idx.shape[0]
        msl = self.min_samples_leaf
        if m < 2 * msl or np.ptp(r[idx]) == 0.0:
            return None
        G = r[idx].sum()
        parent = self._score(G, m)
        best = None
        pos = np.arange(msl - 1, m - msl)
        for f in self._candidate_features(X.shape[1]):
            xs_all = X[idx, f]
            order = np.argsort(xs_all, kind="stable")
            xs = xs_all[order]
            if self.bin_edges is None:
                valid = xs[pos] < xs[pos + 1]
            else:
                codes = np.searchsorted(self.bin_edges[f], xs, side="left")
                valid = codes[pos] < codes[pos + 1]
            if not valid.any():
                continue
            cand = pos[valid]
            GL = np.cumsum(r[idx][order])[cand]
            HL = cand + 1.0
            gain = 0.5 * (self._score(GL, HL) + self._score(G - GL, m - HL) - parent) - self.gamma
            k = int(np.argmax(gain))
            if best is not None and not gain[k] > best.gain:
                continue
            i = cand[k]
            if self.bin_edges is None:
                threshold = 0.5 * (xs[i] + xs[i + 1])
                # midpoint of adjacent doubles can round onto the upper value
                if threshold >= xs[i + 1]:
                    threshold = xs[i]
            else:
                threshold = self.bin_edges[f][codes[i]]
            best = _Split(float(gain[k]), int(f), float(threshold), xs_all <= threshold)
        if best is None:
            return None
        ok = best.gain > 0.0 if self.gamma > 0 else best.gain >= -_GAIN_TOL * (abs(parent) + 1.0)
        return best if ok else None

    def build(self, X, r):
        X = np.asarray(X, dtype=np.float64)
        r = np.asarray(r, dtype=np.float64)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            feature.append(_LEAF)
            threshold.append(np.nan)
            left.append(_LEAF)
            right.append(_LEAF)
            value.append(self._leaf_value(r[idx]))
            return len(feature) - 1

        def split_node(node, split, idx):
            feature[node] = split.feature
            threshold[node] = split.threshold
            li = new_node(idx[split.left_mask])
            ri = new_node(idx[~split.left_mask])
            left[node], right[node] = li, ri
            return (li, idx[split.left_mask]), (ri, idx[~split.left_mask])

        depth_ok = lambda depth: self.max_depth is None or self.max_depth < 0 or depth < self.max_depth
        root_idx = np.arange(X.shape[0])
        root = new_node(root_idx)

        if self.max_leaves is None:
            stack = [(root, root_idx, 0)]
            while stack:
                node, idx, depth = stack.pop()
                if not depth_ok(depth):
                    continue
                split = self._best_split(X, r, idx)
                if split is None:
                    continue
                (li, lidx), (ri, ridx) = split_node(node, split, idx)
                stack.append((ri, ridx, depth + 1))
                stack.append((li, lidx, depth + 1))
        else:
            heap = []
            counter = 0

            def push(node, idx, depth):
                nonlocal counter
                if not depth_ok(depth):
                    return
                split = self._best_split(X, r, idx)
                if split is not None:
                    heapq.heappush(heap, (-split.gain, counter, node, idx, depth, split))
                    counter += 1

            push(root, root_idx, 0)
            n_leaves = 1
            while heap and n_leaves < self.max_leaves:
                _, _, node, idx, depth, split = heapq.heappop(heap)
                (li, lidx), (ri, ridx) = split_node(node, split, idx)
                n_leaves += 1
                push(li, lidx, depth + 1)
                push(ri, ridx, depth + 1)

        return Tree(
            feature=np.array(feature, dtype=np.intp),
            threshold=np.array(threshold, dtype=np.float64),
            left=np.array(left, dtype=np.intp),
            right=np.array(right, dtype=np.intp),
            value=np.array(value, dtype=np.float64),
        )
