"""Declarative model specs, the pinned 21-model default zoo, and seeded fitting."""

import zlib
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from ..exceptions import ConfigError, UsageError
from ..validation import validate_training_data
from .boosting import (
    AdaBoostR2Regressor,
    GradientBoostingRegressor,
    HistGradientBoostingRegressor,
    LGBMStyleRegressor,
    XGBStyleRegressor,
)
from .linear import ElasticNet, Lasso, LinearRegression, Ridge
from .neighbors import KNNRegressor
from .neural import MLPRegressor
from .svr import KernelSVR
from .trees import DecisionTreeRegressor, RandomForestRegressor

FAMILIES = ("linear", "tree", "kernel", "neural", "instance")

ESTIMATORS = {
    "ols": ("linear", LinearRegression),
    "ridge": ("linear", Ridge),
    "lasso": ("linear", Lasso),
    "elastic_net": ("linear", ElasticNet),
    "decision_tree": ("tree", DecisionTreeRegressor),
    "random_forest": ("tree", RandomForestRegressor),
    "gradient_boosting": ("tree", GradientBoostingRegressor),
    "hist_gradient_boosting": ("tree", HistGradientBoostingRegressor),
    "xgb_style": ("tree", XGBStyleRegressor),
    "lgbm_style": ("tree", LGBMStyleRegressor),
    "adaboost_r2": ("tree", AdaBoostR2Regressor),
    "svr": ("kernel", KernelSVR),
    "mlp": ("neural", MLPRegressor),
    "knn": ("instance", KNNRegressor),
}


@dataclass(frozen=True)
class ModelSpec:
    name: str
    family: str
    estimator: str
    hyperparameters: dict = field(default_factory=dict)
    seed_salt: int = 0
    variant: bool = False

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"{self.name}: unknown estimator {self.estimator!r}")
        family, cls = ESTIMATORS[self.estimator]
        if self.family != family:
            raise ConfigError(f"{self.name}: estimator {self.estimator!r} belongs to family {family!r}, not {self.family!r}")
        legal = set(cls().get_params()) - {"random_state"}
        bad = set(self.hyperparameters) - legal
        if bad:
            raise ConfigError(f"{self.name}: illegal hyperparameters {sorted(bad)} for {self.estimator}")

    def with_overrides(self, overrides):
        return ModelSpec(
            name=self.name,
            family=self.family,
            estimator=self.estimator,
            hyperparameters={**self.hyperparameters, **overrides},
            seed_salt=self.seed_salt,
            variant=self.variant,
        )

    def build(self, random_state=None):
        cls = ESTIMATORS[self.estimator][1]
        params = dict(self.hyperparameters)
        if "random_state" in cls().get_params():
            params["random_state"] = random_state
        return cls(**params)


def default_zoo():
    """The pinned 21-model zoo: 16 named configurations plus 5 flagged variants."""
    S = ModelSpec
    return [
        S("linear_regression", "linear", "ols"),
        S("ridge", "linear", "ridge", {"alpha": 1.0}),
        S("lasso", "linear", "lasso", {"alpha": 0.1}),
        S("elastic_net", "linear", "elastic_net", {"alpha": 0.1, "l1_ratio": 0.5}),
        S("random_forest", "tree", "random_forest", {"n_estimators": 100, "max_features": "third"}),
        S("gradient_boosting", "tree", "gradient_boosting", {"n_estimators": 300, "learning_rate": 0.1, "max_depth": 3}),
        S("hist_gradient_boosting", "tree", "hist_gradient_boosting", {"max_bins": 32}),
        S("xgb_style", "tree", "xgb_style", {"reg_lambda": 1.0, "gamma": 0.0, "max_depth": 6}),
        S("lgbm_style", "tree", "lgbm_style", {"num_leaves": 31, "min_child_samples": 20}),
        S("adaboost_r2", "tree", "adaboost_r2", {"n_estimators": 50, "max_depth": 3}),
        S("decision_tree", "tree", "decision_tree"),
        S("svr_rbf", "kernel", "svr", {"kernel": "rbf", "C": 1.0, "epsilon": 0.1}),
        S("svr_poly", "kernel", "svr", {"kernel": "poly", "degree": 3, "C": 1.0, "epsilon": 0.1}),
        S("mlp_128x64", "neural", "mlp", {"hidden_layer_sizes": (128, 64)}),
        S("mlp_64x32", "neural", "mlp", {"hidden_layer_sizes": (64, 32)}),
        S("knn", "instance", "knn", {"n_neighbors": 5}),
        S("ridge_strong", "linear", "ridge", {"alpha": 100.0}, variant=True),
        S("random_forest_deep", "tree", "random_forest", {"n_estimators": 300, "max_features": "all"}, variant=True),
        S("gradient_boosting_slow", "tree", "gradient_boosting", {"n_estimators": 300, "learning_rate": 0.03}, variant=True),
        S("knn_3", "instance", "knn", {"n_neighbors": 3}, variant=True),
        S("knn_9", "instance", "knn", {"n_neighbors": 9}, variant=True),
    ]


def derive_seed(master_seed, spec):
    """Seed for one model, independent of which other models are in the zoo."""
    name_key = zlib.crc32(spec.name.encode("utf-8"))
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFF, int(spec.seed_salt) & 0xFFFFFFFF, name_key])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class TrainedModel:
    """A spec together with its fitted estimator. Treat as immutable."""

    spec: ModelSpec
    estimator: object
    converged: bool = True

    @property
    def name(self):
        return self.spec.name

    @property
    def family(self):
        return self.spec.family

    @property
    def n_features(self):
        return self.estimator.n_features_in_

    def predict(self, X):
        return self.estimator.predict(X)


def fit(spec, X, y, master_seed=0):
    X, y = validate_training_data(X, y)
    est = clone(spec.build(random_state=derive_seed(master_seed, spec)))
    est.fit(X, y)
    return TrainedModel(spec=spec, estimator=est, converged=bool(getattr(est, "converged_", True)))


def predict(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise UsageError(f"expected {model.n_features} feature columns, got shape {X.shape}")
    return model.predict(X)
