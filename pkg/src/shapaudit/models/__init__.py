"""Regression estimators implemented from scratch behind the scikit-learn API."""

from ._tree import Tree, TreeBuilder, TreeEnsemble
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
from .zoo import FAMILIES, ModelSpec, TrainedModel, default_zoo, derive_seed, fit, predict

__all__ = [
    "AdaBoostR2Regressor",
    "DecisionTreeRegressor",
    "ElasticNet",
    "FAMILIES",
    "GradientBoostingRegressor",
    "HistGradientBoostingRegressor",
    "KNNRegressor",
    "KernelSVR",
    "LGBMStyleRegressor",
    "Lasso",
    "LinearRegression",
    "MLPRegressor",
    "ModelSpec",
    "RandomForestRegressor",
    "Ridge",
    "TrainedModel",
    "Tree",
    "TreeBuilder",
    "TreeEnsemble",
    "XGBStyleRegressor",
    "default_zoo",
    "derive_seed",
    "fit",
    "predict",
]
