"""Synthetic regression data with a known importance ordering."""

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .exceptions import ConfigError, UsageError
from .reliability import average_ranks


@dataclass(frozen=True)
class SynthSpec:
    """``y = sum_j w_j x_j + sum_(j,l,w) w x_j x_l + noise`` with ``x ~ U[-1, 1]^d``."""

    n: int
    weights: tuple
    interactions: tuple = ()
    noise_std: float = 0.0
    seed: int = 0
    feature_names: tuple = field(default=None)

    def __post_init__(self):
        if int(self.n) < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if len(self.weights) < 1:
            raise ConfigError("at least one feature weight is required")
        if not self.noise_std >= 0:
            raise ConfigError(f"noise_std must be >= 0, got {self.noise_std}")
        d = len(self.weights)
        for j, l, _ in self.interactions:
            if not (0 <= j < d and 0 <= l < d):
                raise ConfigError(f"interaction ({j}, {l}) references a feature outside 0..{d - 1}")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise ConfigError("feature_names must match the number of weights")

    @property
    def n_features(self):
        return len(self.weights)


def make_synthetic(spec):
    rng = np.random.default_rng(spec.seed)
    d = spec.n_features
    X = rng.uniform(-1.0, 1.0, size=(spec.n, d))
    y = X @ np.asarray(spec.weights, dtype=np.float64)
    for j, l, w in spec.interactions:
        y = y + w * X[:, j] * X[:, l]
    if spec.noise_std > 0:
        y = y + rng.normal(0.0, spec.noise_std, size=spec.n)
    names = spec.feature_names or tuple(f"x{j}" for j in range(d))
    return Dataset(feature_names=names, X=X, y=y, target_name="y")


def ground_truth_ranking(spec):
    """Ranks by ``|w_j|``, valid only for additive specs with i.i.d. uniform features."""
    if spec.interactions:
        raise UsageError("ground-truth ranking is only defined for additive specs")
    return average_ranks(np.abs(np.asarray(spec.weights, dtype=np.float64)))
