"""Binary decision trees (entropy or gini) and a random forest built on them."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import xlogy

from .._seeding import make_rng, spawn_seed
from .base import ProbabilisticClassifier

LEAF = -1


def _node_cost(pos, n, criterion):
    """n times the impurity of a node with ``pos`` positives among ``n`` records."""
    neg = n - pos
    if criterion == "gini":
        return 2.0 * pos * neg / np.maximum(n, 1)
    # n * entropy in nats; 0 log 0 = 0
    return xlogy(n, n) - xlogy(pos, pos) - xlogy(neg, neg)


def _best_split(Z, y, features, criterion, min_samples_leaf):
    """Return (feature, threshold, cost) of the cheapest split or None.

    Candidate thresholds are midpoints between consecutive distinct values.
    Ties go to the earlier candidate feature, then the lower threshold.
    """
    n = y.size
    X = Z[:, features]
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    cum = np.cumsum(y[order], axis=0)[:-1].astype(float)
    n_left = np.arange(1, n, dtype=float)[:, None]
    cost = _node_cost(cum, n_left, criterion) + _node_cost(y.sum() - cum, n - n_left, criterion)
    valid = xs[:-1] < xs[1:]
    if min_samples_leaf > 1:
        valid &= (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
    cost = np.where(valid, cost, np.inf)
    flat = int(np.argmin(cost.T))
    j, i = divmod(flat, n - 1)
    if not np.isfinite(cost[i, j]):
        return None
    thr = 0.5 * (xs[i, j] + xs[i + 1, j])
    if not thr < xs[i + 1, j]:
        thr = xs[i, j]
    return int(features[j]), float(thr), float(cost[i, j])


class _Tree:
    """Array-backed tree: node i splits on ``feature[i] <= threshold[i]`` or is a leaf."""

    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add(self, value):
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.value) - 1

    def finalize(self):
        for name in ("feature", "left", "right"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=int))
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        return self

    @property
    def depth(self):
        def walk(i):
            return 0 if self.feature[i] == LEAF else 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)

    def apply(self, Z):
        node = np.zeros(Z.shape[0], dtype=int)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = Z[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return node

    def predict(self, Z):
        return self.value[self.apply(Z)]


def grow_tree(Z, y, *, criterion="entropy", max_depth=None, min_samples_split=2,
              min_samples_leaf=1, max_features=None, prior=None, rng=None):
    """Grow a tree on standardized inputs.

    Leaves emit the m-estimate (pos + 2 * prior) / (n + 2), where ``prior`` is
    the defective share of the data the tree is grown on unless given. With a
    balanced prior this is Laplace's (pos + 1) / (n + 2); a single-leaf tree
    returns the prior itself.
    """
    if criterion not in ("entropy", "gini"):
        raise ValueError(f"unknown split criterion {criterion!r}")
    n, d = Z.shape
    prior = float(y.mean()) if prior is None else float(prior)
    k = d if max_features is None else max(1, min(d, int(max_features)))
    tree = _Tree()

    def leaf_value(yy):
        return (yy.sum() + 2.0 * prior) / (yy.size + 2.0)

    stack = [(np.arange(n), 0, tree.add(leaf_value(y)))]
    while stack:
        idx, depth, node = stack.pop()
        yy = y[idx]
        pos = int(yy.sum())
        if (max_depth is not None and depth >= max_depth) or idx.size < min_samples_split \
                or pos == 0 or pos == idx.size:
            continue
        features = np.arange(d) if k == d else np.sort(rng.choice(d, size=k, replace=False))
        split = _best_split(Z[idx], yy, features, criterion, min_samples_leaf)
        if split is None:
            continue
        f, thr, cost = split
        parent_cost = float(_node_cost(float(pos), float(idx.size), criterion))
        if not cost < parent_cost - 1e-12:
            continue
        mask = Z[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        left = tree.add(leaf_value(y[li]))
        right = tree.add(leaf_value(y[ri]))
        tree.feature[node], tree.threshold[node] = f, thr
        tree.left[node], tree.right[node] = left, right
        stack.append((ri, depth + 1, right))
        stack.append((li, depth + 1, left))
    return tree.finalize()


class DecisionTree(ProbabilisticClassifier):
    """Single tree; ``criterion='entropy'`` plays the C5.0 role, ``'gini'`` the CART role."""

    def __init__(self, criterion="entropy", max_depth=None, min_samples_split=2,
                 min_samples_leaf=1, max_features=None, random_state=None):
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def _fit(self, Z, y):
        self.tree_ = grow_tree(
            Z, y, criterion=self.criterion, max_depth=self.max_depth,
            min_samples_split=self.min_samples_split, min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features, rng=make_rng(self.random_state),
        )

    def _proba(self, Z):
        return self.tree_.predict(Z)


def stratified_bootstrap(y, rng):
    """Bootstrap indices drawn with replacement inside each class (class counts preserved)."""
    parts = []
    for c in (0, 1):
        members = np.flatnonzero(y == c)
        parts.append(rng.choice(members, size=members.size, replace=True))
    return np.sort(np.concatenate(parts))


class RandomForest(ProbabilisticClassifier):
    """Random forest: per-class bootstrap, ceil(sqrt(d)) candidate features per split.

    The forest probability is the mean of the trees' leaf probabilities.
    """

    def __init__(self, n_estimators=200, criterion="gini", max_depth=None,
                 min_samples_leaf=1, max_features="sqrt", random_state=None):
        self.n_estimators = n_estimators
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def _n_split_features(self, d):
        if self.max_features == "sqrt":
            return math.ceil(math.sqrt(d))
        if self.max_features is None:
            return d
        return int(self.max_features)

    def _fit(self, Z, y):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        k = self._n_split_features(Z.shape[1])
        seed = 0 if self.random_state is None else self.random_state
        self.estimators_ = []
        for t in range(self.n_estimators):
            rng = make_rng(spawn_seed(seed, t))
            boot = stratified_bootstrap(y, rng)
            self.estimators_.append(grow_tree(
                Z[boot], y[boot], criterion=self.criterion, max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf, max_features=k, rng=rng,
            ))

    def _proba(self, Z):
        return np.mean([t.predict(Z) for t in self.estimators_], axis=0)
