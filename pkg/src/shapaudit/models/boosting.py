"""Boosted tree ensembles: gradient boosting and its variants, plus AdaBoost.R2.

All gradient-boosting flavours share one loop on squared loss: start from the
target mean, then repeatedly grow a tree on the current residuals and add it
with shrinkage ``learning_rate``. They differ only in how each tree is grown.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ..exceptions import ConfigError
from ..validation import as_rng, validate_predict_data, validate_training_data
from ._tree import TreeBuilder, TreeEnsemble, quantile_bin_edges


class _SquaredLossBoosting(RegressorMixin, BaseEstimator):
    def _make_builder(self, X):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        if self.n_estimators < 1 or not self.learning_rate > 0:
            raise ConfigError("need n_estimators >= 1 and learning_rate > 0")
        self.n_features_in_ = X.shape[1]
        builder = self._make_builder(X)
        base = float(y.mean())
        raw = np.full(y.shape[0], base)
        losses = [float(np.mean((y - raw) ** 2))]
        trees = []
        for _ in range(self.n_estimators):
            tree = builder.build(X, y - raw)
            raw += self.learning_rate * tree.predict(X)
            trees.append(tree)
            losses.append(float(np.mean((y - raw) ** 2)))
        self.base_score_ = base
        self.trees_ = tuple(trees)
        self.train_loss_ = np.array(losses)
        return self

    @property
    def ensemble_(self):
        return TreeEnsemble(
            trees=self.trees_,
            weights=np.full(len(self.trees_), float(self.learning_rate)),
            base_score=self.base_score_,
        )

    def predict(self, X):
        X = validate_predict_data(self, X)
        return self.ensemble_.predict(X)


class GradientBoostingRegressor(_SquaredLossBoosting):
    """Residual-fitting boosting with depth-limited CART trees.

    Setting ``max_bins`` restricts candidate thresholds to per-feature
    quantile bin edges computed once on the training data.
    """

    def __init__(self, n_estimators=300, learning_rate=0.1, max_depth=3, min_samples_leaf=1, max_bins=None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_bins = max_bins

    def _make_builder(self, X):
        edges = None
        if self.max_bins is not None:
            if self.max_bins < 2:
                raise ConfigError("max_bins must be >= 2")
            edges = quantile_bin_edges(X, self.max_bins)
        self.bin_edges_ = edges
        return TreeBuilder(max_depth=self.max_depth, min_samples_leaf=self.min_samples_leaf, bin_edges=edges)


class HistGradientBoostingRegressor(GradientBoostingRegressor):
    def __init__(self, n_estimators=300, learning_rate=0.1, max_depth=3, min_samples_leaf=1, max_bins=32):
        super().__init__(
            n_estimators=n_estimators,
            learning_rate=learning_rate,
            max_depth=max_depth,
            min_samples_leaf=min_samples_leaf,
            max_bins=max_bins,
        )


class XGBStyleRegressor(_SquaredLossBoosting):
    """Second-order boosting grown depth-wise.

    Leaves take ``-G / (H + reg_lambda)``; a split is kept only when its
    regularised gain exceeds ``gamma``.
    """

    def __init__(self, n_estimators=100, learning_rate=0.3, max_depth=6, reg_lambda=1.0, gamma=0.0, min_child_weight=1):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.reg_lambda = reg_lambda
        self.gamma = gamma
        self.min_child_weight = min_child_weight

    def _make_builder(self, X):
        return TreeBuilder(
            max_depth=self.max_depth,
            min_samples_leaf=self.min_child_weight,
            reg_lambda=self.reg_lambda,
            gamma=self.gamma,
        )


class LGBMStyleRegressor(_SquaredLossBoosting):
    """Second-order boosting grown best-first up to ``num_leaves`` leaves."""

    def __init__(
        self,
        n_estimators=100,
        learning_rate=0.1,
        num_leaves=31,
        max_depth=-1,
        reg_lambda=0.0,
        min_child_samples=20,
    ):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.num_leaves = num_leaves
        self.max_depth = max_depth
        self.reg_lambda = reg_lambda
        self.min_child_samples = min_child_samples

    def _make_builder(self, X):
        if self.num_leaves < 2:
            raise ConfigError("num_leaves must be >= 2")
        return TreeBuilder(
            max_depth=self.max_depth,
            max_leaves=self.num_leaves,
            min_samples_leaf=self.min_child_samples,
            reg_lambda=self.reg_lambda,
        )


class AdaBoostR2Regressor(RegressorMixin, BaseEstimator):
    """Drucker's AdaBoost.R2 with linear loss and shallow CART weak learners.

    Each round fits a tree to a weighted bootstrap resample. Predictions are
    the weighted median of the weak learners, so the model is not additive.
    """

    def __init__(self, n_estimators=50, learning_rate=1.0, max_depth=3, random_state=None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.random_state = random_state

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        if self.n_estimators < 1 or not self.learning_rate > 0:
            raise ConfigError("need n_estimators >= 1 and learning_rate > 0")
        n = X.shape[0]
        self.n_features_in_ = X.shape[1]
        rng = as_rng(self.random_state)
        builder = TreeBuilder(max_depth=self.max_depth)
        w = np.full(n, 1.0 / n)
        trees, alphas = [], []
        for _ in range(self.n_estimators):
            rows = rng.choice(n, size=n, replace=True, p=w)
            tree = builder.build(X[rows], y[rows])
            err = np.abs(tree.predict(X) - y)
            max_err = err.max()
            if max_err <= 0.0:
                trees.append(tree)
                alphas.append(1.0)
                break
            loss = err / max_err
            avg = float(np.dot(w, loss))
            if avg >= 0.5:
                if not trees:
                    trees.append(tree)
                    alphas.append(1.0)
                break
            beta = avg / (1.0 - avg)
            trees.append(tree)
            alphas.append(self.learning_rate * np.log(1.0 / beta))
            w = w * np.power(beta, (1.0 - loss) * self.learning_rate)
            w /= w.sum()
        self.trees_ = tuple(trees)
        self.estimator_weights_ = np.array(alphas)
        return self

    def predict(self, X):
        X = validate_predict_data(self, X)
        preds = np.array([t.predict(X) for t in self.trees_]).T  # (n, M)
        order = np.argsort(preds, axis=1, kind="stable")
        cdf = np.cumsum(self.estimator_weights_[order], axis=1)
        pick = np.argmax(cdf >= 0.5 * cdf[:, -1:], axis=1)
        rows = np.arange(X.shape[0])
        return preds[rows, order[rows, pick]]
