"""Cross-validated R^2 scoring."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import kfold_split
from .exceptions import ConfigError, DataError
from .models.zoo import fit


def r2_score(y, y_hat):
    """Coefficient of determination ``1 - SS_res / SS_tot``.

    Raises :class:`DataError` when ``y`` is constant.
    """
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape or y.ndim != 1 or y.shape[0] < 2:
        raise DataError(f"r2_score needs equal-length vectors of length >= 2, got {y.shape} and {y_hat.shape}")
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0.0:
        raise DataError("R^2 is undefined for a constant target")
    return float(1.0 - np.sum((y - y_hat) ** 2) / ss_tot)


@dataclass(frozen=True)
class CvResult:
    """Per-fold scores; folds with an undefined R^2 hold ``nan`` and are skipped in the summary."""

    model_name: str
    per_fold_r2: tuple
    mean_r2: float
    std_r2: float
    per_fold_rmse: tuple = ()
    per_fold_mae: tuple = ()
    converged: bool = True

    @property
    def n_scored(self):
        return sum(not math.isnan(v) for v in self.per_fold_r2)


def cross_validate(spec, ds, k=5, seed=0, master_seed=None, shuffle=True):
    """Fit ``spec`` on each training split of a seeded k-fold partition.

    ``seed`` drives the fold shuffle; ``master_seed`` (default ``seed``)
    drives model randomness.
    """
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    master_seed = seed if master_seed is None else master_seed
    r2s, rmses, maes = [], [], []
    converged = True
    for i, fold in enumerate(kfold_split(ds.n_samples, k, seed, shuffle=shuffle)):
        model = fit(spec, ds.X[fold.train_indices], ds.y[fold.train_indices], master_seed)
        converged &= model.converged
        y_true = ds.y[fold.test_indices]
        y_pred = model.predict(ds.X[fold.test_indices])
        rmses.append(float(np.sqrt(np.mean((y_true - y_pred) ** 2))))
        maes.append(float(np.mean(np.abs(y_true - y_pred))))
        try:
            r2s.append(r2_score(y_true, y_pred))
        except DataError:
            warnings.warn(f"{spec.name}: fold {i} has a constant target, its R^2 is excluded")
            r2s.append(math.nan)
    scored = np.array([v for v in r2s if not math.isnan(v)])
    mean = float(scored.mean()) if scored.size else math.nan
    std = float(scored.std()) if scored.size else math.nan
    return CvResult(
        model_name=spec.name,
        per_fold_r2=tuple(r2s),
        mean_r2=mean,
        std_r2=std,
        per_fold_rmse=tuple(rmses),
        per_fold_mae=tuple(maes),
        converged=converged,
    )
