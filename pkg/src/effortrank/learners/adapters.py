"""Plug third-party classifiers and precomputed probabilities into the learner zoo."""
from __future__ import annotations

import csv
import importlib
from pathlib import Path

import numpy as np
from sklearn.base import clone

from .base import ProbabilisticClassifier, positive_proba


class SklearnClassifier(ProbabilisticClassifier):
    """Any scikit-learn classifier with ``predict_proba``, fed standardized inputs."""

    def __init__(self, estimator=None, random_state=None):
        self.estimator = estimator
        self.random_state = random_state

    def _fit(self, Z, y):
        est = clone(self.estimator)
        if self.random_state is not None and "random_state" in est.get_params():
            est.set_params(random_state=self.random_state % (2**32))
        self.estimator_ = est.fit(Z, y)

    def _proba(self, Z):
        return positive_proba(self.estimator_, Z)


def import_estimator(dotted, **params):
    module, _, name = dotted.rpartition(".")
    return getattr(importlib.import_module(module), name)(**params)


def radial_svm(random_state=None):
    return SklearnClassifier(
        import_estimator("sklearn.svm.SVC", kernel="rbf", probability=True), random_state=random_state
    )


def load_external_probabilities(path, d, delimiter=","):
    """Read ``(record id, probability)`` rows and align them with ``d.ids``.

    A header row is allowed. Every id of ``d`` must appear exactly once and no
    unknown ids may appear; probabilities must lie in [0, 1].
    """
    path = Path(path)
    probs = {}
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns (id, probability)")
            rid, value = row[0].strip(), row[1].strip()
            try:
                p = float(value)
            except ValueError:
                if lineno == 1:
                    continue
                raise ValueError(f"{path}:{lineno}: bad probability {value!r}") from None
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{path}:{lineno}: probability {p} outside [0, 1]")
            if rid in probs:
                raise ValueError(f"{path}:{lineno}: duplicate id {rid!r}")
            probs[rid] = p
    missing = [i for i in d.ids if i not in probs]
    if missing:
        raise ValueError(f"{path}: no probability for {len(missing)} record(s), e.g. {missing[0]!r}")
    extra = set(probs) - set(d.ids)
    if extra:
        raise ValueError(f"{path}: {len(extra)} id(s) not in dataset {d.name!r}, e.g. {sorted(extra)[0]!r}")
    return np.array([probs[i] for i in d.ids])
