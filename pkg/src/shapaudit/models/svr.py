"""Epsilon-insensitive support vector regression trained by dual coordinate ascent.

The bias is folded into the kernel (``Q = K + 1``), which removes the
equality constraint of the textbook dual and leaves the box-constrained problem

    min_beta  0.5 * beta' Q beta - y' beta + epsilon * ||beta||_1,   -C <= beta_i <= C

Each coordinate has a closed-form minimiser (a clipped soft-threshold), so a
pass over all coordinates never increases the objective. The target is
centred before training; ``intercept_ = mean(y) + sum(beta)``.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ..exceptions import ConfigError, ConvergenceWarning
from ..validation import validate_predict_data, validate_training_data


def rbf_kernel(A, B, gamma):
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def poly_kernel(A, B, gamma, degree, coef0):
    return (gamma * A @ B.T + coef0) ** degree


class KernelSVR(RegressorMixin, BaseEstimator):
    """Kernel SVR with ``rbf`` or ``poly`` kernels.

    ``gamma=None`` means ``1 / n_features``.
    """

    def __init__(self, kernel="rbf", C=1.0, epsilon=0.1, gamma=None, degree=3, coef0=1.0, tol=1e-6, max_passes=50_000):
        self.kernel = kernel
        self.C = C
        self.epsilon = epsilon
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.tol = tol
        self.max_passes = max_passes

    def _kernel(self, A, B):
        if self.kernel == "rbf":
            return rbf_kernel(A, B, self.gamma_)
        if self.kernel == "poly":
            return poly_kernel(A, B, self.gamma_, self.degree, self.coef0)
        raise ConfigError(f"unknown kernel {self.kernel!r}")

    def dual_objective(self, beta=None):
        beta = self.dual_coef_ if beta is None else beta
        return 0.5 * beta @ self._Q @ beta - self._yc @ beta + self.epsilon * np.abs(beta).sum()

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        if not self.C > 0 or self.epsilon < 0:
            raise ConfigError("need C > 0 and epsilon >= 0")
        n, d = X.shape
        self.n_features_in_ = d
        self.gamma_ = 1.0 / d if self.gamma is None else float(self.gamma)
        self._y_mean = float(y.mean())
        yc = y - self._y_mean
        Q = self._kernel(X, X) + 1.0
        diag = np.diag(Q).copy()
        beta = np.zeros(n)
        grad = -yc.copy()  # Q @ beta - yc
        C, eps = float(self.C), float(self.epsilon)
        self.converged_ = False
        for n_pass in range(1, self.max_passes + 1):
            max_delta = 0.0
            for i in range(n):
                qii = diag[i]
                u = beta[i] - grad[i] / qii
                new = np.sign(u) * max(abs(u) - eps / qii, 0.0)
                new = min(max(new, -C), C)
                delta = new - beta[i]
                if delta != 0.0:
                    beta[i] = new
                    grad += delta * Q[:, i]
                    max_delta = max(max_delta, abs(delta))
            if max_delta < self.tol:
                self.converged_ = True
                break
        if not self.converged_:
            warnings.warn(f"SVR dual ascent stopped after {self.max_passes} passes", ConvergenceWarning)
        self.n_iter_ = n_pass
        self._Q, self._yc = Q, yc
        self.dual_coef_ = beta
        support = np.flatnonzero(beta != 0.0)
        self.support_ = support
        self.support_vectors_ = X[support]
        self.intercept_ = self._y_mean + float(beta.sum())
        return self

    def predict(self, X):
        X = validate_predict_data(self, X, "dual_coef_")
        if self.support_.size == 0:
            return np.full(X.shape[0], self.intercept_)
        return self._kernel(X, self.support_vectors_) @ self.dual_coef_[self.support_] + self.intercept_
