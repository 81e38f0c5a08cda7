"""Logistic regression, Gaussian naive Bayes and k-nearest-neighbour classifiers."""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from .base import ProbabilisticClassifier


class LogisticRegression(ProbabilisticClassifier):
    """L2-regularized logistic regression fitted by fixed-step batch gradient descent."""

    def __init__(self, max_iter=500, learning_rate=0.1, l2=1e-4):
        self.max_iter = max_iter
        self.learning_rate = learning_rate
        self.l2 = l2

    def _fit(self, Z, y):
        n, d = Z.shape
        w = np.zeros(d)
        b = 0.0
        for _ in range(self.max_iter):
            r = expit(Z @ w + b) - y
            w -= self.learning_rate * (Z.T @ r / n + self.l2 * w)
            b -= self.learning_rate * r.mean()
        self.coef_ = w
        self.intercept_ = b

    def decision_function(self, X):
        return self._standardize(np.asarray(X, dtype=float)) @ self.coef_ + self.intercept_

    def _proba(self, Z):
        return expit(Z @ self.coef_ + self.intercept_)


class NaiveBayes(ProbabilisticClassifier):
    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def _fit(self, Z, y):
        self.class_prior_ = np.array([np.mean(y == 0), np.mean(y == 1)])
        self.theta_ = np.vstack([Z[y == c].mean(axis=0) for c in (0, 1)])
        self.var_ = np.maximum(np.vstack([Z[y == c].var(axis=0) for c in (0, 1)]), self.var_floor)

    def _joint_log_likelihood(self, Z):
        jll = []
        for c in (0, 1):
            ll = -0.5 * np.sum(np.log(2 * np.pi * self.var_[c]) + (Z - self.theta_[c]) ** 2 / self.var_[c], axis=1)
            jll.append(np.log(self.class_prior_[c]) + ll)
        return np.column_stack(jll)

    def _proba(self, Z):
        jll = self._joint_log_likelihood(Z)
        return expit(jll[:, 1] - jll[:, 0])


class KNeighbors(ProbabilisticClassifier):
    """k-NN on standardized features; P(defective) is the defective share of the k nearest.

    Equal distances are resolved in favour of the lower training index.
    """

    def __init__(self, k=8, chunk_elements=2_000_000):
        self.k = k
        self.chunk_elements = chunk_elements

    def _fit(self, Z, y):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.k > Z.shape[0]:
            raise ValueError(f"k={self.k} exceeds the {Z.shape[0]} training records")
        self.Z_ = Z
        self.y_ = y

    def kneighbors(self, X):
        return self._neighbors(self._standardize(np.asarray(X, dtype=float)))

    def _neighbors(self, Z):
        n_train, d = self.Z_.shape
        step = max(1, self.chunk_elements // max(1, n_train * d))
        out = np.empty((Z.shape[0], self.k), dtype=int)
        for start in range(0, Z.shape[0], step):
            q = Z[start:start + step]
            dist = np.sum((q[:, None, :] - self.Z_[None, :, :]) ** 2, axis=2)
            out[start:start + step] = np.argsort(dist, axis=1, kind="stable")[:, : self.k]
        return out

    def _proba(self, Z):
        return self.y_[self._neighbors(Z)].mean(axis=1)
