"""Shapley attributions via exact enumeration, KernelSHAP, or TreeSHAP, plus global importance."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigError, UsageError
from .exact import coalition_value, coalition_values, predict_fn, shapley_exact
from .kernel import FULL, kernel_shap
from .tree import as_ensemble, is_tree_model, tree_shap

ENGINES = ("auto", "exact", "kernel", "tree")
AUTO_EXACT_MAX_FEATURES = 12


@dataclass(frozen=True)
class Attribution:
    """Per-row Shapley values with the background baseline they are measured from."""

    phi: np.ndarray
    baseline: float
    foreground: np.ndarray
    engine: str = "exact"

    def efficiency_gap(self, model):
        """``baseline + sum_j phi[i, j] - f(x_i)`` for every explained row."""
        return self.baseline + self.phi.sum(axis=1) - predict_fn(model)(self.foreground)


@dataclass(frozen=True)
class GlobalImportance:
    phi_bar: np.ndarray
    feature_names: tuple


def global_importance(attr, feature_names=None):
    """Mean absolute attribution of each feature over the explained rows."""
    phi = np.atleast_2d(np.asarray(attr.phi if isinstance(attr, Attribution) else attr, dtype=np.float64))
    if phi.shape[0] < 1:
        raise UsageError("global importance needs at least one explained row")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{j}" for j in range(phi.shape[1]))
    return GlobalImportance(phi_bar=np.abs(phi).mean(axis=0), feature_names=names)


def resolve_engine(model, engine, d):
    if engine not in ENGINES:
        raise ConfigError(f"unknown SHAP engine {engine!r}; choose from {ENGINES}")
    if engine != "auto":
        return engine
    if is_tree_model(model):
        return "tree"
    return "exact" if d <= AUTO_EXACT_MAX_FEATURES else "kernel"


def explain(model, X, background, engine="auto", kernel_budget=None, seed=0):
    """Attribute every row of ``X`` against ``background`` with the chosen engine.

    ``kernel_budget=None`` means full enumeration up to
    ``AUTO_EXACT_MAX_FEATURES`` features and ``2 * d + 2048`` sampled
    coalitions beyond that.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    background = np.atleast_2d(np.asarray(background, dtype=np.float64))
    d = X.shape[1]
    if background.shape[1] != d:
        raise UsageError(f"background has {background.shape[1]} features, foreground has {d}")
    chosen = resolve_engine(model, engine, d)
    if chosen == "tree":
        phi, base = tree_shap(model, X, background)
    elif chosen == "exact":
        phi, base = shapley_exact(model, X, background)
    else:
        if kernel_budget is None:
            kernel_budget = FULL if d <= AUTO_EXACT_MAX_FEATURES else 2 * d + 2048
        phi, base = kernel_shap(model, X, background, budget=kernel_budget, seed=seed)
    return Attribution(phi=phi, baseline=base, foreground=X, engine=chosen)


def explain_model(model, ds, engine="auto", background=None, kernel_budget=None, seed=0):
    """Attribute all rows of ``ds``; the background defaults to ``ds.X`` itself."""
    bg = ds.X if background is None else background
    attr = explain(model, ds.X, bg, engine=engine, kernel_budget=kernel_budget, seed=seed)
    return attr, global_importance(attr, ds.feature_names)


__all__ = [
    "Attribution",
    "ENGINES",
    "FULL",
    "GlobalImportance",
    "as_ensemble",
    "coalition_value",
    "coalition_values",
    "explain",
    "explain_model",
    "global_importance",
    "is_tree_model",
    "kernel_shap",
    "predict_fn",
    "shapley_exact",
    "tree_shap",
]
