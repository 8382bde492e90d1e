"""Fully connected ReLU regressor trained with Adam on minibatches."""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ..exceptions import ConfigError, ConvergenceWarning
from ..validation import as_rng, validate_predict_data, validate_training_data


class _Layout:
    """Slices of one flat parameter vector holding every weight and bias."""

    def __init__(self, sizes):
        self.sizes = tuple(sizes)
        self.shapes = []
        offset = 0
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            self.shapes.append(((offset, fan_in, fan_out), offset + fan_in * fan_out))
            offset += fan_in * fan_out + fan_out
        self.size = offset

    def unpack(self, flat):
        layers = []
        for (start, fan_in, fan_out), bias_start in self.shapes:
            W = flat[start:bias_start].reshape(fan_in, fan_out)
            b = flat[bias_start : bias_start + fan_out]
            layers.append((W, b))
        return layers


def forward(layout, flat, X):
    """Return the output vector and the post-activation of every layer."""
    acts = [X]
    layers = layout.unpack(flat)
    h = X
    for k, (W, b) in enumerate(layers):
        h = h @ W + b
        if k < len(layers) - 1:
            h = np.maximum(h, 0.0)
        acts.append(h)
    return h[:, 0], acts


def loss_and_gradient(layout, flat, X, y, alpha, n_total=None):
    """Half mean squared error plus ``0.5 * alpha * ||W||^2 / n_total`` and its gradient."""
    n = X.shape[0]
    n_total = n if n_total is None else n_total
    out, acts = forward(layout, flat, X)
    layers = layout.unpack(flat)
    resid = out - y
    loss = 0.5 * resid @ resid / n
    loss += 0.5 * alpha * sum(np.sum(W * W) for W, _ in layers) / n_total
    grad = np.empty_like(flat)
    gl = layout.unpack(grad)
    delta = (resid / n)[:, None]
    for k in range(len(layers) - 1, -1, -1):
        W, _ = layers[k]
        gW, gb = gl[k]
        gW[...] = acts[k].T @ delta + alpha * W / n_total
        gb[...] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ W.T) * (acts[k] > 0.0)
    return loss, grad


class MLPRegressor(RegressorMixin, BaseEstimator):
    """ReLU network with fan-in scaled (He) Gaussian initialisation.

    Training stops early once the epoch loss fails to improve by ``tol`` for
    ``n_iter_no_change`` consecutive epochs; otherwise it runs ``max_iter``
    epochs and flags ``converged_ = False``. The output bias starts at the
    target mean.
    """

    def __init__(
        self,
        hidden_layer_sizes=(128, 64),
        alpha=1e-4,
        learning_rate_init=1e-3,
        batch_size=16,
        max_iter=2000,
        tol=1e-4,
        n_iter_no_change=10,
        beta_1=0.9,
        beta_2=0.999,
        epsilon=1e-8,
        random_state=None,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.alpha = alpha
        self.learning_rate_init = learning_rate_init
        self.batch_size = batch_size
        self.max_iter = max_iter
        self.tol = tol
        self.n_iter_no_change = n_iter_no_change
        self.beta_1 = beta_1
        self.beta_2 = beta_2
        self.epsilon = epsilon
        self.random_state = random_state

    def _init_params(self, d, y, rng):
        layout = _Layout((d, *self.hidden_layer_sizes, 1))
        flat = np.zeros(layout.size)
        for W, b in layout.unpack(flat):
            W[...] = rng.normal(0.0, np.sqrt(2.0 / W.shape[0]), size=W.shape)
        layout.unpack(flat)[-1][1][...] = y.mean()
        return layout, flat

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        if any(int(h) < 1 for h in self.hidden_layer_sizes):
            raise ConfigError(f"invalid hidden_layer_sizes {self.hidden_layer_sizes}")
        n, d = X.shape
        self.n_features_in_ = d
        rng = as_rng(self.random_state)
        layout, flat = self._init_params(d, y, rng)
        m = np.zeros_like(flat)
        v = np.zeros_like(flat)
        b1, b2, lr, eps = self.beta_1, self.beta_2, self.learning_rate_init, self.epsilon
        batch = min(self.batch_size, n)
        t = 0
        best, stale = np.inf, 0
        curve = []
        self.converged_ = False
        for epoch in range(self.max_iter):
            order = rng.permutation(n)
            accum = 0.0
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                loss, g = loss_and_gradient(layout, flat, X[idx], y[idx], self.alpha, n)
                accum += loss * idx.shape[0]
                t += 1
                m = b1 * m + (1 - b1) * g
                v = b2 * v + (1 - b2) * g * g
                step = lr * np.sqrt(1 - b2**t) / (1 - b1**t)
                flat -= step * m / (np.sqrt(v) + eps)
            epoch_loss = accum / n
            curve.append(epoch_loss)
            if epoch_loss > best - self.tol:
                stale += 1
            else:
                stale = 0
            best = min(best, epoch_loss)
            if stale >= self.n_iter_no_change:
                self.converged_ = True
                break
        if not self.converged_:
            warnings.warn(f"MLP reached max_iter={self.max_iter} epochs", ConvergenceWarning)
        self.n_iter_ = len(curve)
        self.loss_curve_ = np.array(curve)
        self._layout = layout
        self.coefs_ = flat
        return self

    def predict(self, X):
        X = validate_predict_data(self, X, "coefs_")
        return forward(self._layout, self.coefs_, X)[0]
