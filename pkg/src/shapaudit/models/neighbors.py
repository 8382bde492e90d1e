import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ..exceptions import ConfigError
from ..validation import validate_predict_data, validate_training_data

_CHUNK = 2048


class KNNRegressor(RegressorMixin, BaseEstimator):
    """Uniform average of the ``n_neighbors`` nearest training targets.

    Euclidean distance; equal distances favour the lower training index.
    """

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        if not 1 <= self.n_neighbors <= X.shape[0]:
            raise ConfigError(f"n_neighbors={self.n_neighbors} outside [1, {X.shape[0]}]")
        self.n_features_in_ = X.shape[1]
        self.X_train_ = X
        self.y_train_ = y
        return self

    def kneighbors(self, X):
        X = validate_predict_data(self, X, "X_train_")
        out = np.empty((X.shape[0], self.n_neighbors), dtype=np.intp)
        for start in range(0, X.shape[0], _CHUNK):
            block = X[start : start + _CHUNK]
            diff = block[:, None, :] - self.X_train_[None, :, :]
            dist = np.einsum("ijk,ijk->ij", diff, diff)
            out[start : start + _CHUNK] = np.argsort(dist, axis=1, kind="stable")[:, : self.n_neighbors]
        return out

    def predict(self, X):
        return self.y_train_[self.kneighbors(X)].mean(axis=1)
