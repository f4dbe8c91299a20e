"""Fully connected network: ReLU hidden layers, logistic output.

Trained with mini-batch gradient descent plus momentum on the binary
cross-entropy; the backward pass is verified against central finite
differences by ``mlp_gradient_check``.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateDataError
from ..validation import as_labels, as_matrix, check_fitted
from .base import BinaryClassifier

Params = list[tuple[np.ndarray, np.ndarray]]  # (weights, biases) per layer


def _init_params(layer_sizes, rng) -> Params:
    params = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params.append((W, np.zeros(fan_out)))
    return params


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so neither exp() overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    expz = np.exp(z[~pos])
    out[~pos] = expz / (1.0 + expz)
    return out


def _forward(params: Params, X: np.ndarray):
    """Activations per layer; hidden ReLU, logistic output column."""
    activations = [X]
    pre = []
    a = X
    for i, (W, b) in enumerate(params):
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < len(params) - 1 else _sigmoid(z)
        activations.append(a)
    return activations, pre


def _loss(params: Params, X: np.ndarray, y: np.ndarray) -> float:
    p = _forward(params, X)[0][-1][:, 0]
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _backward(params: Params, X: np.ndarray, y: np.ndarray):
    """Mean-cross-entropy gradients for every weight matrix and bias."""
    n = X.shape[0]
    activations, pre = _forward(params, X)
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(params)
    delta = (activations[-1][:, 0] - y).reshape(-1, 1) / n
    for layer in range(len(params) - 1, -1, -1):
        W, _ = params[layer]
        grads[layer] = (activations[layer].T @ delta, delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ W.T) * (pre[layer - 1] > 0.0)
    return grads


class MLPClassifier(BinaryClassifier):
    kind = "mlp"
    _fitted_attribute = "params_"

    def __init__(self, hidden_layers=(100,), learning_rate=0.01, epochs=200,
                 batch_size=32, momentum=0.9, seed=0):
        self.hidden_layers = hidden_layers
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.momentum = momentum
        self.seed = seed

    def fit(self, X, y):
        X = as_matrix(X)
        y = as_labels(y, X.shape[0])
        if np.unique(y).size < 2:
            raise DegenerateDataError("training data has a single label")
        self.n_features_ = X.shape[1]
        sizes = [X.shape[1], *self.hidden_layers, 1]
        rng = np.random.default_rng(self.seed)
        params = _init_params(sizes, rng)
        velocity = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
        y_float = y.astype(np.float64)
        n = X.shape[0]
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start:start + self.batch_size]
                grads = _backward(params, X[batch], y_float[batch])
                for layer, (gW, gb) in enumerate(grads):
                    vW, vb = velocity[layer]
                    vW = self.momentum * vW - self.learning_rate * gW
                    vb = self.momentum * vb - self.learning_rate * gb
                    W, b = params[layer]
                    params[layer] = (W + vW, b + vb)
                    velocity[layer] = (vW, vb)
        self.params_ = params
        return self

    def predict_proba(self, X):
        check_fitted(self, "params_")
        X = self._check_input(X, self.n_features_)
        p = _forward(self.params_, X)[0][-1][:, 0]
        return self._stack_proba(p)

    def _export_state(self) -> dict:
        return {
            "n_features": self.n_features_,
            "weights": [W.tolist() for W, _ in self.params_],
            "biases": [b.tolist() for _, b in self.params_],
        }

    def _import_state(self, state: dict) -> None:
        self.n_features_ = state["n_features"]
        self.params_ = [
            (np.asarray(W, dtype=np.float64), np.asarray(b, dtype=np.float64))
            for W, b in zip(state["weights"], state["biases"])
        ]


def mlp_gradient_check(layer_sizes, seed=0, params: Params | None = None,
                       X=None, y=None, step: float = 1e-6) -> float:
    """Max relative error between backprop and central finite differences.

    With only ``layer_sizes`` and ``seed`` given, a random network and a
    small random batch are generated; explicit ``params``/``X``/``y``
    override them (used for constructed edge cases).
    """
    rng = np.random.default_rng(seed)
    if params is None:
        params = _init_params(list(layer_sizes), rng)
    if X is None:
        X = rng.normal(size=(5, layer_sizes[0]))
    if y is None:
        y = rng.integers(0, 2, size=X.shape[0]).astype(np.float64)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    analytic = _backward(params, X, y)
    worst = 0.0
    for layer, (W, b) in enumerate(params):
        for arr, grad in ((W, analytic[layer][0]), (b, analytic[layer][1])):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + step
                up = _loss(params, X, y)
                arr[idx] = orig - step
                down = _loss(params, X, y)
                arr[idx] = orig
                numeric = (up - down) / (2.0 * step)
                denom = max(abs(grad[idx]), abs(numeric), 1e-6)
                worst = max(worst, abs(grad[idx] - numeric) / denom)
    return worst
