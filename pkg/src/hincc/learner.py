"""Multinomial logistic regression used as the local classifier.

Objective: mean softmax cross-entropy plus ``(lam / 2) * ||W||^2`` (the bias
is not penalised).  Training is full-batch L-BFGS from a zero start, so a
given dataset always yields the same model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
from scipy.optimize import minimize
from scipy.special import log_softmax, softmax

FORMAT_VERSION = 1


class DegenerateDataError(ValueError):
    """Training data that cannot define a classifier (e.g. a single class)."""


@dataclass
class LinearModel:
    weights: np.ndarray          # q x D
    bias: np.ndarray             # q
    lam: float = 1e-3
    classes: tuple[str, ...] | None = None
    loss_history: list[float] = field(default_factory=list, repr=False)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def zeros(cls, q: int, dim: int, lam: float = 1e-3, classes=None) -> "LinearModel":
        return cls(np.zeros((q, dim)), np.zeros(q), lam, classes)

    def scores(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} features, got {x.shape[-1]}")
        return x @ self.weights.T + self.bias

    def predict_proba(self, x) -> np.ndarray:
        return softmax(self.scores(x), axis=-1)

    def predict_label(self, x):
        # np.argmax returns the first maximum, i.e. the lowest class index
        return np.argmax(self.predict_proba(x), axis=-1)


def predict_proba(model: LinearModel, x) -> np.ndarray:
    return model.predict_proba(x)


def predict_label(model: LinearModel, x):
    return model.predict_label(x)


def _check(model: LinearModel, X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("need a non-empty 2-D feature matrix")
    if X.shape[1] != model.dim:
        raise ValueError(f"expected {model.dim} features, got {X.shape[1]}")
    if len(y) != len(X):
        raise ValueError("features and labels differ in length")
    if y.min() < 0 or y.max() >= model.n_classes:
        raise ValueError("class index out of range")
    return X, y


def loss_and_gradient(model: LinearModel, X, y):
    """Regularised cross-entropy and its exact gradient ``(dW, db)``."""
    X, y = _check(model, X, y)
    n = len(X)
    logp = log_softmax(model.scores(X), axis=1)
    loss = -logp[np.arange(n), y].mean() + 0.5 * model.lam * np.sum(model.weights ** 2)
    resid = np.exp(logp)
    resid[np.arange(n), y] -= 1.0
    resid /= n
    grad_w = resid.T @ X + model.lam * model.weights
    grad_b = resid.sum(axis=0)
    return float(loss), (grad_w, grad_b)


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    # sort rows by (label, features) so the fitted model ignores input order
    return np.lexsort(np.vstack([X.T, y[None, :]]))


@dataclass(frozen=True)
class LogisticRegression:
    """Base learner: ``fit(X, y, q)`` returns a :class:`LinearModel`."""

    lam: float = 1e-3
    tol: float = 1e-6
    max_epochs: int = 500

    def fit(self, X, y, n_classes: int, classes=None) -> LinearModel:
        return train(X, y, n_classes, lam=self.lam, max_epochs=self.max_epochs,
                     tol=self.tol, classes=classes)


def train(X, y, n_classes: int | None = None, lam: float = 1e-3,
          max_epochs: int = 500, tol: float = 1e-6, classes=None) -> LinearModel:
    """Fit the regularised softmax model.

    Stops once the gradient's max-norm drops below ``tol`` or after
    ``max_epochs`` L-BFGS iterations.  Raises :class:`DegenerateDataError`
    when fewer than two classes are present.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) == 0:
        raise DegenerateDataError("no training rows")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("training data contains a single class")
    order = _canonical_order(X, y)
    X, y = X[order], y[order]
    q, d = n_classes, X.shape[1]
    model = LinearModel.zeros(q, d, lam, classes)

    def objective(theta):
        model.weights = theta[:q * d].reshape(q, d)
        model.bias = theta[q * d:]
        loss, (gw, gb) = loss_and_gradient(model, X, y)
        return loss, np.concatenate([gw.ravel(), gb])

    theta0 = np.zeros(q * d + q)
    initial = objective(theta0)[0]
    res = minimize(objective, theta0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_epochs, "gtol": tol, "ftol": 0.0})
    theta = res.x if res.fun <= initial else theta0
    model.weights = theta[:q * d].reshape(q, d).copy()
    model.bias = theta[q * d:].copy()
    model.loss_history = [initial, float(min(res.fun, initial))]
    return model


def save_model(model: LinearModel, fh: TextIO) -> None:
    """Plain-text model: header, dimensions, then row-major weights and bias."""
    fh.write(f"format-version {FORMAT_VERSION}\n")
    fh.write("linear-model\n")
    fh.write(f"classes {model.n_classes}\n")
    fh.write(f"dimension {model.dim}\n")
    fh.write(f"lambda {model.lam!r}\n")
    if model.classes is not None:
        fh.write("labels " + " ".join(model.classes) + "\n")
    fh.write("weights\n")
    for row in model.weights:
        fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    fh.write("bias\n")
    fh.write(" ".join(repr(float(v)) for v in model.bias) + "\n")


def load_model(fh: TextIO) -> LinearModel:
    lines = fh.read().splitlines()
    pos = 0

    def take(prefix: str) -> str:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].startswith(prefix):
            raise ValueError(f"line {pos + 1}: expected {prefix.strip()!r}")
        rest = lines[pos][len(prefix):]
        pos += 1
        return rest

    if take("format-version ").strip() != str(FORMAT_VERSION):
        raise ValueError("line 1: unsupported model format version")
    take("linear-model")
    q = int(take("classes "))
    d = int(take("dimension "))
    lam = float(take("lambda "))
    classes = None
    if pos < len(lines) and lines[pos].startswith("labels "):
        classes = tuple(take("labels ").split())
    take("weights")
    weights = np.zeros((q, d))
    for i in range(q):
        row = take("").split()
        if len(row) != d:
            raise ValueError(f"line {pos}: expected {d} weights, got {len(row)}")
        weights[i] = [float(v) for v in row]
    take("bias")
    bias = np.array([float(v) for v in take("").split()])
    if len(bias) != q:
        raise ValueError(f"line {pos}: expected {q} bias values")
    if pos != len(lines):
        raise ValueError(f"line {pos + 1}: trailing content")
    return LinearModel(weights, bias, lam, classes)
