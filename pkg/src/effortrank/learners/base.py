from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


def binary_target(y):
    """Coerce labels to {0, 1}; both classes must be present."""
    y = np.asarray(y)
    if y.dtype == bool:
        y = y.astype(int)
    values = np.unique(y)
    if not np.isin(values, (0, 1)).all():
        raise ValueError(f"labels must be binary 0/1 or boolean, got {values[:5]}")
    if values.size < 2:
        raise ValueError("training data contains a single class; need defective and clean modules")
    return y.astype(int)


def positive_proba(estimator, X):
    """Probability of the defective class from any fitted sklearn-style classifier."""
    proba = estimator.predict_proba(X)
    classes = list(getattr(estimator, "classes_", [0, 1]))
    return np.asarray(proba)[:, classes.index(1)]


class ProbabilisticClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier that standardizes features with training statistics.

    Subclasses implement ``_fit(Z, y)`` and ``_proba(Z)`` on standardized
    inputs; ``_proba`` returns the defective-class probability.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = binary_target(y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[~(scale > 1e-12 * np.maximum(1.0, np.abs(self.mean_)))] = 1.0
        self.scale_ = scale
        self._fit(self._standardize(X), y)
        return self

    def _standardize(self, X):
        return (X - self.mean_) / self.scale_

    def predict_proba(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        p = np.clip(self._proba(self._standardize(X)), 0.0, 1.0)
        p = np.where(np.isfinite(p), p, 0.5)
        return np.column_stack([1.0 - p, p])

    def predict(self, X, threshold=0.5):
        return (self.predict_proba(X)[:, 1] >= threshold).astype(int)

    def _fit(self, Z, y):
        raise NotImplementedError

    def _proba(self, Z):
        raise NotImplementedError
