"""Input validation helpers, thin wrappers around scikit-learn's checks."""

import numpy as np
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import DataError, UsageError


def validate_training_data(X, y):
    """Return float64 ``(X, y)`` or raise :class:`DataError`."""
    try:
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if X.shape[0] < 2:
        raise DataError(f"need at least 2 samples, got {X.shape[0]}")
    return X, y


def validate_predict_data(estimator, X, attributes="n_features_in_"):
    check_is_fitted(estimator, attributes)
    try:
        X = check_array(X, dtype=np.float64)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if X.shape[1] != estimator.n_features_in_:
        raise UsageError(
            f"X has {X.shape[1]} features, but {type(estimator).__name__} "
            f"was fitted with {estimator.n_features_in_}"
        )
    return X


def as_rng(seed):
    """Coerce ``seed`` (None, int, SeedSequence or Generator) into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
