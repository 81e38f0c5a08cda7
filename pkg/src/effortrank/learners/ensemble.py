"""Under-sampling ensembles for imbalanced data: UnderBagging and RUSBoost."""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import clone

from .._seeding import make_rng, spawn_seed
from .base import ProbabilisticClassifier, positive_proba


def under_sample_indices(y, ir=1.0, rng=None, weights=None):
    """Indices of all minority records plus a without-replacement majority sample.

    The majority sample has ``ceil(n_minority / ir)`` records, capped at the
    majority size. ``weights`` (one per record) bias the majority draw; uniform
    or absent weights give a plain uniform draw. Returned indices are sorted.
    """
    y = np.asarray(y).astype(int)
    if ir <= 0:
        raise ValueError("ir must be positive")
    rng = rng if rng is not None else make_rng(None)
    pos, neg = np.flatnonzero(y == 1), np.flatnonzero(y == 0)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("under-sampling needs both classes")
    minority, majority = (pos, neg) if pos.size <= neg.size else (neg, pos)
    size = min(majority.size, math.ceil(minority.size / ir))
    p = None
    if weights is not None:
        w = np.asarray(weights, dtype=float)[majority]
        if not np.all(w == w[0]):
            p = w / w.sum()
    picked = rng.choice(majority, size=size, replace=False, p=p)
    return np.sort(np.concatenate([minority, picked]))


def make_under_bag_sample(d, ir=1.0, seed=None):
    """Balanced sub-dataset of ``d`` (see :func:`under_sample_indices`)."""
    idx = under_sample_indices(d.defective, ir, make_rng(seed))
    return d.subset(idx)


class _UnderSamplingEnsemble(ProbabilisticClassifier):
    def _member(self, i, Z, y, sample_weight=None):
        bag_rng = make_rng(spawn_seed(self._seed, i, 0))
        bag = under_sample_indices(y, self.ir, bag_rng, sample_weight)
        est = clone(self.estimator)
        if "random_state" in est.get_params():
            est.set_params(random_state=spawn_seed(self._seed, i, 1))
        est.fit(Z[bag], y[bag])
        return bag, est

    @property
    def _seed(self):
        return 0 if self.random_state is None else self.random_state


class UnderBagging(_UnderSamplingEnsemble):
    """Bagging over balanced under-samples; probability is the plain member mean."""

    def __init__(self, estimator=None, n_estimators=10, ir=1.0, random_state=None):
        self.estimator = estimator
        self.n_estimators = n_estimators
        self.ir = ir
        self.random_state = random_state

    def _fit(self, Z, y):
        if self.estimator is None:
            raise ValueError("UnderBagging needs a base estimator")
        self.bags_, self.estimators_ = [], []
        for i in range(self.n_estimators):
            bag, est = self._member(i, Z, y)
            self.bags_.append(bag)
            self.estimators_.append(est)

    def member_proba(self, X):
        Z = self._standardize(np.asarray(X, dtype=float))
        return np.vstack([positive_proba(e, Z) for e in self.estimators_])

    def _proba(self, Z):
        return np.mean([positive_proba(e, Z) for e in self.estimators_], axis=0)


class RUSBoost(_UnderSamplingEnsemble):
    """AdaBoost.M1 where every round fits on a weighted random under-sample.

    The ensemble probability is the alpha-weighted mean of member
    probabilities, alpha = ln((1 - err) / err); it stays in [0, 1] and with
    a single round equals the one member's output.
    """

    def __init__(self, estimator=None, n_estimators=10, ir=1.0, threshold=0.5, random_state=None):
        self.estimator = estimator
        self.n_estimators = n_estimators
        self.ir = ir
        self.threshold = threshold
        self.random_state = random_state

    def _fit(self, Z, y):
        if self.estimator is None:
            raise ValueError("RUSBoost needs a base estimator")
        n = y.size
        w = np.full(n, 1.0 / n)
        self.bags_, self.estimators_, self.alphas_ = [], [], []
        for t in range(self.n_estimators):
            bag, est = self._member(t, Z, y, w)
            correct = (positive_proba(est, Z) >= self.threshold).astype(int) == y
            err = float(np.sum(w[~correct]))
            if err >= 0.5 and t > 0:
                break
            err = min(max(err, 1e-10), 0.5 - 1e-10)
            beta = err / (1.0 - err)
            self.bags_.append(bag)
            self.estimators_.append(est)
            self.alphas_.append(math.log(1.0 / beta))
            w = np.where(correct, w * beta, w)
            w /= w.sum()
        self.alphas_ = np.asarray(self.alphas_)

    def _proba(self, Z):
        P = np.vstack([positive_proba(e, Z) for e in self.estimators_])
        return self.alphas_ @ P / self.alphas_.sum()
