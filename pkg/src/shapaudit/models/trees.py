"""CART regression tree and random forest estimators."""

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ..exceptions import ConfigError
from ..validation import as_rng, validate_predict_data, validate_training_data
from ._tree import TreeBuilder, TreeEnsemble


def resolve_max_features(max_features, d):
    """Translate a ``max_features`` setting into a feature count in ``[1, d]``."""
    if max_features is None or max_features == "all":
        return d
    if max_features == "third":
        return max(1, math.ceil(d / 3))
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(d)))
    if isinstance(max_features, float):
        if not 0.0 < max_features <= 1.0:
            raise ConfigError(f"fractional max_features must lie in (0, 1], got {max_features}")
        return max(1, math.ceil(max_features * d))
    if isinstance(max_features, int) and max_features >= 1:
        return min(d, max_features)
    raise ConfigError(f"invalid max_features {max_features!r}")


class DecisionTreeRegressor(RegressorMixin, BaseEstimator):
    """Greedy variance-reduction regression tree.

    Thresholds sit at midpoints between adjacent distinct values. Equal gains
    are resolved in favour of the lower feature index, then the lower threshold.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1, max_features=None, random_state=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        self.n_features_in_ = X.shape[1]
        builder = TreeBuilder(
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            max_features=resolve_max_features(self.max_features, X.shape[1]),
            rng=as_rng(self.random_state),
        )
        self.tree_ = builder.build(X, y)
        return self

    @property
    def ensemble_(self):
        return TreeEnsemble(trees=(self.tree_,), weights=np.ones(1), base_score=0.0)

    def predict(self, X):
        X = validate_predict_data(self, X)
        return self.tree_.predict(X)


class RandomForestRegressor(RegressorMixin, BaseEstimator):
    """Bagged CART trees with per-split feature subsampling.

    ``max_features="third"`` considers ``ceil(d / 3)`` features per split.
    """

    def __init__(
        self,
        n_estimators=100,
        max_depth=None,
        min_samples_leaf=1,
        max_features="third",
        bootstrap=True,
        random_state=None,
    ):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        if self.n_estimators < 1:
            raise ConfigError("n_estimators must be >= 1")
        n, d = X.shape
        self.n_features_in_ = d
        rng = as_rng(self.random_state)
        mf = resolve_max_features(self.max_features, d)
        trees = []
        for _ in range(self.n_estimators):
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            builder = TreeBuilder(
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                max_features=mf,
                rng=rng,
            )
            trees.append(builder.build(X[rows], y[rows]))
        self.trees_ = tuple(trees)
        return self

    @property
    def ensemble_(self):
        m = len(self.trees_)
        return TreeEnsemble(trees=self.trees_, weights=np.full(m, 1.0 / m), base_score=0.0)

    def predict(self, X):
        X = validate_predict_data(self, X)
        return np.mean([tree.predict(X) for tree in self.trees_], axis=0)
