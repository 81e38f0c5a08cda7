"""Probabilistic classifiers behind a small spec/train/predict surface.

Every estimator here follows the scikit-learn API (``fit``/``predict_proba``,
``get_params``) so it can also be used directly with sklearn tooling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .adapters import SklearnClassifier, import_estimator, load_external_probabilities, radial_svm
from .base import ProbabilisticClassifier, binary_target, positive_proba
from .ensemble import RUSBoost, UnderBagging, make_under_bag_sample, under_sample_indices
from .simple import KNeighbors, LogisticRegression, NaiveBayes
from .tree import DecisionTree, RandomForest, grow_tree, stratified_bootstrap

KINDS = (
    "LogisticRegression", "NaiveBayes", "KNN", "DecisionTree", "RandomForest",
    "UnderBagging", "RUSBoost", "Sklearn", "External",
)
ENSEMBLES = ("UnderBagging", "RUSBoost")

DEFAULT_K = 8
DEFAULT_TREES = 200
DEFAULT_NESTED_TREES = 50
DEFAULT_IR = 1.0
DEFAULT_MEMBERS = 10
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class LearnerSpec:
    """What to train: a learner kind plus its parameters.

    Ensembles carry their base learner as ``params["base"]``; a random forest
    nested in an ensemble defaults to 50 trees instead of 200.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}; expected one of {KINDS}")
        p = self.params
        if self.kind == "KNN" and int(p.get("k", DEFAULT_K)) < 1:
            raise ValueError("KNN needs k >= 1")
        if self.kind == "RandomForest" and int(p.get("tree_count", DEFAULT_TREES)) < 1:
            raise ValueError("RandomForest needs tree_count >= 1")
        if self.kind in ENSEMBLES:
            base = p.get("base")
            if not isinstance(base, LearnerSpec):
                raise ValueError(f"{self.kind} needs a base LearnerSpec")
            if base.kind in ENSEMBLES or base.kind == "External":
                raise ValueError(f"{self.kind} base learner cannot be {base.kind}")
            if float(p.get("ir", DEFAULT_IR)) <= 0:
                raise ValueError("ir must be positive")
        if self.kind == "External" and "path" not in p:
            raise ValueError("External learner needs a 'path' template containing {dataset}")

    def build(self, seed=None, nested=False):
        """Unfitted estimator for this spec."""
        p = self.params
        kind = self.kind
        if kind == "LogisticRegression":
            return LogisticRegression(
                max_iter=int(p.get("iterations", 500)),
                learning_rate=float(p.get("learning_rate", 0.1)),
                l2=float(p.get("regularization", 1e-4)),
            )
        if kind == "NaiveBayes":
            return NaiveBayes(var_floor=float(p.get("var_floor", 1e-9)))
        if kind == "KNN":
            return KNeighbors(k=int(p.get("k", DEFAULT_K)))
        if kind == "DecisionTree":
            return DecisionTree(
                criterion=p.get("split_criterion", "entropy"),
                max_depth=p.get("max_depth"),
                min_samples_leaf=int(p.get("min_samples_leaf", 1)),
                random_state=seed,
            )
        if kind == "RandomForest":
            default = DEFAULT_NESTED_TREES if nested else DEFAULT_TREES
            return RandomForest(
                n_estimators=int(p.get("tree_count", default)),
                criterion=p.get("split_criterion", "gini"),
                max_depth=p.get("max_depth"),
                random_state=seed,
            )
        if kind == "Sklearn":
            est = p["estimator"]
            if isinstance(est, str):
                est = import_estimator(est, **p.get("estimator_params", {}))
            return SklearnClassifier(est, random_state=seed)
        if kind in ENSEMBLES:
            cls = UnderBagging if kind == "UnderBagging" else RUSBoost
            return cls(
                estimator=p["base"].build(nested=True),
                n_estimators=int(p.get("n_members", DEFAULT_MEMBERS)),
                ir=float(p.get("ir", DEFAULT_IR)),
                random_state=seed,
            )
        raise ValueError(f"learner kind {kind!r} has no in-process estimator")


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: LearnerSpec
    estimator: Any
    feature_names: tuple
    seed: int


def train(spec: LearnerSpec, d, seed=0) -> TrainedModel:
    """Fit ``spec`` on dataset ``d``; identical (spec, d, seed) give identical models."""
    binary_target(d.defective)
    if spec.kind == "External":
        return TrainedModel(spec, None, d.feature_names, seed)
    if spec.kind == "KNN" and int(spec.params.get("k", DEFAULT_K)) > len(d):
        raise ValueError(f"k={spec.params.get('k', DEFAULT_K)} exceeds the {len(d)} training records")
    est = spec.build(seed=seed)
    est.fit(d.X, d.defective.astype(int))
    return TrainedModel(spec, est, d.feature_names, seed)


def predict_proba(m: TrainedModel, d) -> np.ndarray:
    """Defective-class probability per record of ``d``, in record order."""
    if m.spec.kind == "External":
        return load_external_probabilities(m.spec.params["path"].format(dataset=d.name), d)
    if tuple(d.feature_names) != tuple(m.feature_names):
        raise ValueError(
            f"feature schema mismatch: model trained on {len(m.feature_names)} features"
            f" {list(m.feature_names)[:4]}..., dataset {d.name!r} has {list(d.feature_names)[:4]}..."
        )
    return positive_proba(m.estimator, d.X)


def predict_label(m: TrainedModel, d, threshold=DEFAULT_THRESHOLD) -> np.ndarray:
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    return predict_proba(m, d) >= threshold


_BASE_TAGS = {
    "lr": lambda o: LearnerSpec("LogisticRegression"),
    "nb": lambda o: LearnerSpec("NaiveBayes"),
    "ibk": lambda o: LearnerSpec("KNN", {"k": o["k"]}),
    "knn": lambda o: LearnerSpec("KNN", {"k": o["k"]}),
    "c50": lambda o: LearnerSpec("DecisionTree", {"split_criterion": "entropy"}),
    "cart": lambda o: LearnerSpec("DecisionTree", {"split_criterion": "gini"}),
    "rf": lambda o: LearnerSpec("RandomForest", {"tree_count": o["tree_count"]}),
    "svm": lambda o: LearnerSpec(
        "Sklearn", {"estimator": "sklearn.svm.SVC",
                    "estimator_params": {"kernel": "rbf", "probability": True}}
    ),
}

# tags of the 16-learner zoo that run in-process (jrip needs --external)
LEARNER_TAGS = (
    "lr", "svm", "ibk", "nb", "c50", "cart", "rf",
    "ubag_c50", "ubag_rf", "ubag_cart", "ubag_svm",
    "ubst_c50", "ubst_rf", "ubst_cart", "ubst_svm",
)


def learner_from_tag(tag, *, k=DEFAULT_K, tree_count=DEFAULT_TREES,
                     nested_tree_count=DEFAULT_NESTED_TREES, ir=DEFAULT_IR,
                     n_members=DEFAULT_MEMBERS, external=None) -> LearnerSpec:
    """Resolve a report tag such as ``rf`` or ``ubag_svm`` into a :class:`LearnerSpec`.

    ``external`` maps tags (e.g. ``jrip``) to probability-file path templates.
    """
    opts = {"k": k, "tree_count": tree_count}
    if external and tag in external:
        return LearnerSpec("External", {"path": external[tag]})
    if tag in _BASE_TAGS:
        return _BASE_TAGS[tag](opts)
    prefix, _, base = tag.partition("_")
    if prefix in ("ubag", "ubst") and base in _BASE_TAGS:
        base_spec = _BASE_TAGS[base](dict(opts, tree_count=nested_tree_count))
        kind = "UnderBagging" if prefix == "ubag" else "RUSBoost"
        return LearnerSpec(kind, {"base": base_spec, "ir": ir, "n_members": n_members})
    raise ValueError(f"unknown learner tag {tag!r}")


__all__ = [
    "KINDS", "LEARNER_TAGS", "LearnerSpec", "TrainedModel", "train", "predict_proba",
    "predict_label", "learner_from_tag", "make_under_bag_sample", "under_sample_indices",
    "load_external_probabilities", "ProbabilisticClassifier", "LogisticRegression",
    "NaiveBayes", "KNeighbors", "DecisionTree", "RandomForest", "UnderBagging", "RUSBoost",
    "SklearnClassifier", "radial_svm", "grow_tree", "stratified_bootstrap", "positive_proba",
]
