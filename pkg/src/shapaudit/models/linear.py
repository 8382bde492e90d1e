"""Linear regressors: least squares, ridge, and coordinate-descent lasso / elastic net.

The intercept is never penalised: every model is fitted on centred data and
recovers ``intercept_ = mean(y) - mean(X) @ coef_``.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ..exceptions import ConfigError, ConvergenceWarning
from ..validation import validate_predict_data, validate_training_data


class _LinearModel(RegressorMixin, BaseEstimator):
    def _center(self, X, y):
        X, y = validate_training_data(X, y)
        self.n_features_in_ = X.shape[1]
        self._x_mean = X.mean(axis=0)
        self._y_mean = y.mean()
        return X - self._x_mean, y - self._y_mean

    def _set_intercept(self):
        self.intercept_ = float(self._y_mean - self._x_mean @ self.coef_)

    def predict(self, X):
        X = validate_predict_data(self, X, "coef_")
        return X @ self.coef_ + self.intercept_


class LinearRegression(_LinearModel):
    """Ordinary least squares via a rank-revealing lstsq solve (pseudo-inverse when singular)."""

    def fit(self, X, y):
        Xc, yc = self._center(X, y)
        self.coef_, _, self.rank_, _ = np.linalg.lstsq(Xc, yc, rcond=None)
        self._set_intercept()
        return self


class Ridge(_LinearModel):
    """Minimises ``||y - Xw - b||^2 + alpha * ||w||^2``."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        if self.alpha < 0:
            raise ConfigError(f"ridge alpha must be >= 0, got {self.alpha}")
        Xc, yc = self._center(X, y)
        d = Xc.shape[1]
        A = np.vstack([Xc, np.sqrt(self.alpha) * np.eye(d)])
        b = np.concatenate([yc, np.zeros(d)])
        self.coef_ = np.linalg.lstsq(A, b, rcond=None)[0]
        self._set_intercept()
        return self


def _soft_threshold(z, t):
    return np.sign(z) * max(abs(z) - t, 0.0)


class ElasticNet(_LinearModel):
    """Cyclic coordinate descent on

        (1 / 2n) ||y - Xw - b||^2 + alpha * l1_ratio * ||w||_1
            + 0.5 * alpha * (1 - l1_ratio) * ||w||^2

    Stops when the largest coefficient change in a sweep drops below ``tol``
    or after ``max_iter`` sweeps; the latter sets ``converged_ = False`` and
    emits a :class:`ConvergenceWarning`.
    """

    def __init__(self, alpha=0.1, l1_ratio=0.5, tol=1e-8, max_iter=10_000):
        self.alpha = alpha
        self.l1_ratio = l1_ratio
        self.tol = tol
        self.max_iter = max_iter

    def _objective(self, Xc, yc, w):
        n = Xc.shape[0]
        resid = yc - Xc @ w
        l1 = self.alpha * self.l1_ratio * np.abs(w).sum()
        l2 = 0.5 * self.alpha * (1.0 - self.l1_ratio) * w @ w
        return resid @ resid / (2 * n) + l1 + l2

    def fit(self, X, y):
        if self.alpha < 0 or not 0.0 <= self.l1_ratio <= 1.0:
            raise ConfigError("need alpha >= 0 and 0 <= l1_ratio <= 1")
        Xc, yc = self._center(X, y)
        n, d = Xc.shape
        w = np.zeros(d)
        resid = yc.copy()
        col_sq = np.einsum("ij,ij->j", Xc, Xc)
        l1_pen = n * self.alpha * self.l1_ratio
        l2_pen = n * self.alpha * (1.0 - self.l1_ratio)
        history = [self._objective(Xc, yc, w)]
        self.converged_ = False
        for sweep in range(1, self.max_iter + 1):
            max_delta = 0.0
            for j in range(d):
                if col_sq[j] == 0.0:
                    continue
                old = w[j]
                rho = Xc[:, j] @ resid + col_sq[j] * old
                new = _soft_threshold(rho, l1_pen) / (col_sq[j] + l2_pen)
                if new != old:
                    resid -= (new - old) * Xc[:, j]
                    w[j] = new
                    max_delta = max(max_delta, abs(new - old))
            history.append(self._objective(Xc, yc, w))
            if max_delta < self.tol:
                self.converged_ = True
                break
        if not self.converged_:
            warnings.warn(f"{type(self).__name__} did not converge in {self.max_iter} sweeps", ConvergenceWarning)
        self.n_iter_ = sweep
        self.objective_history_ = np.array(history)
        self.coef_ = w
        self._set_intercept()
        return self


class Lasso(ElasticNet):
    def __init__(self, alpha=0.1, tol=1e-8, max_iter=10_000):
        super().__init__(alpha=alpha, l1_ratio=1.0, tol=tol, max_iter=max_iter)
