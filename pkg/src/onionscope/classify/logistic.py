"""Multinomial logistic regression by proximal batch gradient descent.

The objective is the mean cross-entropy plus ``R(W) / (C * n)`` where ``R``
is the chosen penalty on the non-bias weights:

* ``l2``: ``0.5 * ||W||^2``
* ``l1``: ``||W||_1``
* ``elasticnet``: ``a * ||W||_1 + (1 - a) / 2 * ||W||^2``

Each step is a gradient step on the cross-entropy followed by the penalty's
proximal map. The step starts at 0.1 and halves whenever the objective would
increase, so the objective is non-increasing across iterations.
"""
from __future__ import annotations

import itertools
import warnings

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin

__all__ = ["LogisticRegression", "NonConvergence", "softmax", "objective", "loss_grad", "PENALTIES"]

PENALTIES = ("none", "l2", "l1", "elasticnet")


class NonConvergence(UserWarning):
    def __init__(self, message: str, grad_norm: float):
        super().__init__(message)
        self.grad_norm = grad_norm


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _penalty_value(W: np.ndarray, penalty: str, l1_ratio: float) -> float:
    if penalty == "none":
        return 0.0
    if penalty == "l2":
        return 0.5 * float(np.sum(W * W))
    if penalty == "l1":
        return float(np.abs(W).sum())
    if penalty == "elasticnet":
        return l1_ratio * float(np.abs(W).sum()) + (1 - l1_ratio) * 0.5 * float(np.sum(W * W))
    raise ValueError(f"unknown penalty {penalty!r}")


def _cross_entropy(Z: np.ndarray, Y: np.ndarray) -> float:
    Zs = Z - Z.max(axis=1, keepdims=True)
    logp = Zs - np.log(np.exp(Zs).sum(axis=1, keepdims=True))
    return float(-(logp * Y).sum() / Z.shape[0])


def objective(W, b, X, Y, penalty="l2", C=1.0, l1_ratio=0.5) -> float:
    n = X.shape[0]
    Z = np.asarray(X @ W.T) + b
    return _cross_entropy(Z, Y) + _penalty_value(W, penalty, l1_ratio) / (C * n)


def loss_grad(W, b, X, Y, penalty="l2", C=1.0, l1_ratio=0.5):
    """Objective and its (sub)gradient with respect to ``W`` and ``b``."""
    n = X.shape[0]
    Z = np.asarray(X @ W.T) + b
    G = (softmax(Z) - Y) / n
    gW = np.asarray((X.T @ G).T)
    lam = 1.0 / (C * n)
    if penalty == "l2":
        gW = gW + lam * W
    elif penalty == "l1":
        gW = gW + lam * np.sign(W)
    elif penalty == "elasticnet":
        gW = gW + lam * (l1_ratio * np.sign(W) + (1 - l1_ratio) * W)
    return _cross_entropy(Z, Y) + lam * _penalty_value(W, penalty, l1_ratio), gW, G.sum(axis=0)


def _prox(W: np.ndarray, t: float, penalty: str, l1_ratio: float) -> np.ndarray:
    if penalty == "none":
        return W
    if penalty == "l2":
        return W / (1.0 + t)
    if penalty == "l1":
        return np.sign(W) * np.maximum(np.abs(W) - t, 0.0)
    soft = np.sign(W) * np.maximum(np.abs(W) - t * l1_ratio, 0.0)
    return soft / (1.0 + t * (1 - l1_ratio))


def _fit_multinomial(X, Y, penalty, C, l1_ratio, max_iter, step, tol):
    n, d = X.shape
    k = Y.shape[1]
    W = np.zeros((k, d))
    b = np.zeros(k)
    lam = 1.0 / (C * n)
    XT = X.T.tocsr() if sp.issparse(X) else np.ascontiguousarray(X.T)

    def full(W_, b_):
        Z_ = np.asarray(X @ np.ascontiguousarray(W_.T)) + b_
        return Z_, _cross_entropy(Z_, Y) + lam * _penalty_value(W_, penalty, l1_ratio)

    Z, obj = full(W, b)
    losses = [obj]
    grad_norm = np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        G = (softmax(Z) - Y) / n
        gW = np.asarray(XT @ G).T
        gb = G.sum(axis=0)
        while True:
            W_new = _prox(W - step * gW, step * lam, penalty, l1_ratio)
            b_new = b - step * gb
            Z_new, obj_new = full(W_new, b_new)
            if obj_new <= obj + 1e-12 or step < 1e-12:
                break
            step /= 2.0
        grad_norm = float(np.sqrt(np.sum((W - W_new) ** 2) + np.sum((b - b_new) ** 2)) / step)
        W, b, Z, obj = W_new, b_new, Z_new, min(obj_new, obj)
        losses.append(obj)
        if grad_norm < tol:
            converged = True
            break
    return W, b, converged, grad_norm, it, losses


class LogisticRegression(ClassifierMixin, BaseEstimator):
    """Regularized logistic regression over dense or sparse features.

    ``multi_class="multinomial"`` fits one softmax model; ``"ovo"`` fits a
    two-class model per class pair and averages the pairwise probabilities.
    """

    def __init__(self, penalty: str = "l1", C: float = 1.0, l1_ratio: float = 0.5, max_iter: int = 1000,
                 step: float = 0.1, tol: float = 1e-4, multi_class: str = "multinomial", classes=None):
        self.penalty = penalty
        self.C = C
        self.l1_ratio = l1_ratio
        self.max_iter = max_iter
        self.step = step
        self.tol = tol
        self.multi_class = multi_class
        self.classes = classes

    def _check(self):
        if self.penalty not in PENALTIES:
            raise ValueError(f"unknown penalty {self.penalty!r}")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.multi_class not in ("multinomial", "ovo"):
            raise ValueError(f"unknown multi_class {self.multi_class!r}")

    def fit(self, X, y):
        self._check()
        X = X if sp.issparse(X) else np.asarray(X, dtype=float)
        y = np.asarray(y)
        present = set(y.tolist())
        classes = list(self.classes) if self.classes is not None else sorted(present)
        if len(present) < 2:
            raise ValueError("need at least two classes to train")
        self.classes_ = np.array(classes, dtype=object)
        idx = {c: i for i, c in enumerate(classes)}
        yi = np.array([idx[c] for c in y.tolist()])
        args = (self.penalty, self.C, self.l1_ratio, self.max_iter, self.step, self.tol)
        if self.multi_class == "multinomial":
            Y = np.eye(len(classes))[yi]
            W, b, conv, gn, it, losses = _fit_multinomial(X, Y, *args)
            self.coef_, self.intercept_ = W, b
            self.converged_, self.grad_norm_, self.n_iter_, self.loss_curve_ = conv, gn, it, losses
        else:
            self.pairs_ = {}
            conv, gn, it = True, 0.0, 0
            for i, j in itertools.combinations(sorted(set(yi.tolist())), 2):
                mask = (yi == i) | (yi == j)
                Y = np.eye(2)[(yi[mask] == j).astype(int)]
                W, b, c, g, n_it, _ = _fit_multinomial(X[mask], Y, *args)
                self.pairs_[(i, j)] = (W, b)
                conv, gn, it = conv and c, max(gn, g), max(it, n_it)
            self.converged_, self.grad_norm_, self.n_iter_ = conv, gn, it
        if not self.converged_:
            warnings.warn(NonConvergence(
                f"no convergence after {self.max_iter} iterations, gradient norm {self.grad_norm_:.3g}",
                self.grad_norm_))
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X @ self.coef_.T) + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        if self.multi_class == "multinomial":
            return softmax(self.decision_function(X))
        k = len(self.classes_)
        n = X.shape[0]
        P = np.zeros((n, k))
        for (i, j), (W, b) in self.pairs_.items():
            pj = softmax(np.asarray(X @ W.T) + b)[:, 1]
            P[:, j] += pj
            P[:, i] += 1.0 - pj
        total = P.sum(axis=1, keepdims=True)
        total[total == 0] = 1.0
        return P / total

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. ties go to the earlier class
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
