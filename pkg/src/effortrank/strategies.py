"""Ranking-score strategies turning classifier output and effort into an inspection order.

All strategies produce a :class:`ScoredModules` (higher score = inspect
earlier) and share a single total order realized by :func:`rank`: tier
descending (CBS+ only), score descending, then effort ascending, then original
index ascending.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, clone

from .learners import positive_proba

DEFAULT_ZETA = 0.05
DEFAULT_THRESHOLD = 0.5

STRATEGIES = ("prob", "label_loc", "cbs_plus", "prob_loc", "ea_z", "manual_up")
# the five strategies compared head to head; manual_up is the unsupervised baseline
COMPARED = ("prob", "label_loc", "cbs_plus", "prob_loc", "ea_z")
DISPLAY_NAMES = {
    "prob": "Prob", "label_loc": "Label/LOC", "cbs_plus": "CBS+",
    "prob_loc": "Prob/LOC", "ea_z": "EA-Z", "manual_up": "ManualUp",
}


@dataclass(frozen=True, eq=False)
class ScoredModules:
    scores: np.ndarray
    efforts: np.ndarray
    strategy: str
    zeta: float | None = None
    tiers: np.ndarray | None = None

    def __len__(self):
        return len(self.scores)


@dataclass(frozen=True, eq=False)
class RankedList:
    order: np.ndarray
    scores: np.ndarray

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order.tolist())


def _vec(x, name):
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector")
    return a


def _check(probs=None, efforts=None, labels=None):
    out = []
    n = None
    for name, v in (("probs", probs), ("efforts", efforts), ("labels", labels)):
        if v is None:
            continue
        a = np.asarray(v, dtype=bool) if name == "labels" else _vec(v, name)
        if n is not None and a.size != n:
            raise ValueError(f"length mismatch: {name} has {a.size} entries, expected {n}")
        n = a.size
        out.append(a)
    if probs is not None:
        p = out[0]
        if not np.all(np.isfinite(p)) or (p < 0).any() or (p > 1).any():
            raise ValueError("probabilities must lie in [0, 1]")
    if efforts is not None:
        e = out[1 if probs is not None else 0]
        if not np.all(np.isfinite(e)) or (e <= 0).any():
            raise ValueError("efforts must be positive")
    return out


def score_prob(probs, efforts) -> ScoredModules:
    p, e = _check(probs, efforts)
    return ScoredModules(p.copy(), e, "prob")


def score_label_loc(labels, efforts) -> ScoredModules:
    e, lab = _check(efforts=efforts, labels=labels)
    return ScoredModules(lab.astype(float) / e, e, "label_loc")


def score_prob_loc(probs, efforts) -> ScoredModules:
    p, e = _check(probs, efforts)
    return ScoredModules(p / e, e, "prob_loc")


def score_cbs_plus(probs, efforts, threshold=DEFAULT_THRESHOLD) -> ScoredModules:
    """Predicted-defective tier first, each tier ordered by prob/effort descending.

    The tier (1 for ``prob >= threshold``) is kept as a separate leading sort
    key instead of being folded into the score, so tiny densities never lose
    precision to an additive offset.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    p, e = _check(probs, efforts)
    tiers = (p >= threshold).astype(int)
    return ScoredModules(p / e, e, "cbs_plus", tiers=tiers)


def lift_probability(probs, zeta=DEFAULT_ZETA):
    """Affine map of [0, 1] onto [zeta, 1]: p * (1 - zeta) + zeta."""
    if not 0.0 < zeta < 1.0:
        raise ValueError(f"zeta must lie in (0, 1), got {zeta}")
    p = np.asarray(probs, dtype=float)
    return np.clip(p * (1.0 - zeta) + zeta, zeta, 1.0)


def score_ea_z(probs, efforts, zeta=DEFAULT_ZETA) -> ScoredModules:
    """Effort-aware score with a probability floor: (p(1 - zeta) + zeta) / effort."""
    if not 0.0 < zeta < 1.0:
        raise ValueError(f"zeta must lie in (0, 1), got {zeta}")
    p, e = _check(probs, efforts)
    return ScoredModules(lift_probability(p, zeta) / e, e, "ea_z", zeta=float(zeta))


def score_manual_up(efforts) -> ScoredModules:
    (e,) = _check(efforts=efforts)
    return ScoredModules(1.0 / e, e, "manual_up")


def rank(s: ScoredModules) -> RankedList:
    scores = np.asarray(s.scores, dtype=float)
    if np.isnan(scores).any():
        raise ValueError("NaN score cannot be ranked")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    idx = np.arange(scores.size)
    keys = [idx, np.asarray(s.efforts, dtype=float), -scores]
    if s.tiers is not None:
        keys.append(-np.asarray(s.tiers))
    # lexsort sorts by the last key first
    order = np.lexsort(keys)
    return RankedList(order, scores)


def score(strategy, probs=None, efforts=None, *, zeta=DEFAULT_ZETA, threshold=DEFAULT_THRESHOLD,
          labels=None) -> ScoredModules:
    """Dispatch by stable strategy name. ``label_loc`` derives labels from ``threshold``
    unless ``labels`` is given."""
    if strategy == "prob":
        return score_prob(probs, efforts)
    if strategy == "label_loc":
        if labels is None:
            labels = np.asarray(probs, dtype=float) >= threshold
        return score_label_loc(labels, efforts)
    if strategy == "cbs_plus":
        return score_cbs_plus(probs, efforts, threshold)
    if strategy == "prob_loc":
        return score_prob_loc(probs, efforts)
    if strategy == "ea_z":
        return score_ea_z(probs, efforts, zeta)
    if strategy == "manual_up":
        return score_manual_up(efforts)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


class EffortAwareRanker(BaseEstimator):
    """Classifier plus ranking strategy as one estimator.

    ``fit(X, y)`` fits a clone of ``estimator``; ``predict(X, effort)`` returns
    ranking scores and ``rank(X, effort)`` the inspection order.

    >>> from effortrank.learners import LogisticRegression
    >>> ranker = EffortAwareRanker(LogisticRegression(), strategy="ea_z")
    """

    def __init__(self, estimator=None, strategy="ea_z", zeta=DEFAULT_ZETA,
                 threshold=DEFAULT_THRESHOLD):
        self.estimator = estimator
        self.strategy = strategy
        self.zeta = zeta
        self.threshold = threshold

    def fit(self, X, y):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy != "manual_up":
            self.estimator_ = clone(self.estimator).fit(X, y)
        return self

    def predict_proba(self, X):
        return positive_proba(self.estimator_, X)

    def score_modules(self, X, effort) -> ScoredModules:
        probs = None if self.strategy == "manual_up" else self.predict_proba(X)
        return score(self.strategy, probs, effort, zeta=self.zeta, threshold=self.threshold)

    def predict(self, X, effort):
        return self.score_modules(X, effort).scores

    def rank(self, X, effort) -> np.ndarray:
        return rank(self.score_modules(X, effort)).order
