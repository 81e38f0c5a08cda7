from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from effortrank.learners import LogisticRegression
from effortrank.strategies import (
    STRATEGIES, EffortAwareRanker, ScoredModules, lift_probability, rank, score, score_cbs_plus,
    score_ea_z, score_label_loc, score_manual_up, score_prob, score_prob_loc,
)


def order(s):
    return rank(s).order.tolist()


def test_prob_examples():
    np.testing.assert_array_equal(score_prob([0.9, 0.1], [1, 1]).scores, [0.9, 0.1])
    assert order(score_prob([0.5, 0.5], [9, 2])) == [1, 0]
    assert order(score_prob([0.02, 0.5], [1, 1])) == [1, 0]
    with pytest.raises(ValueError):
        score_prob([0.1, 0.2], [1])


def test_label_loc_examples():
    np.testing.assert_array_equal(score_label_loc([True, False], [10, 5]).scores, [0.1, 0.0])
    assert order(score_label_loc([False] * 4, [7, 3, 9, 1])) == [3, 1, 0, 2]
    assert order(score_label_loc([True, True], [4, 2])) == [1, 0]
    with pytest.raises(ValueError):
        score_label_loc([True], [0])


def test_cbs_plus_examples():
    assert order(score_cbs_plus([0.9, 0.6, 0.4], [10, 2, 1], 0.5)) == [1, 0, 2]
    with pytest.raises(ValueError):
        score_cbs_plus([0.4], [-1])


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(1, 1000)), min_size=1, max_size=30),
       st.booleans())
def test_cbs_plus_single_tier_equals_prob_loc(rows, high):
    p = np.array([r[0] for r in rows])
    p = 0.5 + p / 2 if high else p * 0.499
    e = np.array([r[1] for r in rows], dtype=float)
    assert order(score_cbs_plus(p, e)) == order(score_prob_loc(p, e))


def test_prob_loc_examples():
    assert score_prob_loc([0.02], [8]).scores[0] == 0.0025
    assert score_prob_loc([0.01], [8]).scores[0] == 0.00125
    np.testing.assert_array_equal(score_prob_loc([0.0, 0.0], [3, 900]).scores, [0, 0])


def test_ea_z_examples():
    assert score_ea_z([0.0], [4], 0.05).scores[0] == pytest.approx(0.0125, abs=1e-15)
    assert score_ea_z([1.0], [10], 0.05).scores[0] == pytest.approx(0.1, abs=1e-15)
    assert score_ea_z([0.02], [8], 0.05).scores[0] == pytest.approx(0.008625, abs=1e-15)
    for z in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            score_ea_z([0.5], [1], z)


def test_lift_probability_bounds():
    p = lift_probability(np.linspace(0, 1, 11), 0.05)
    assert p.min() == pytest.approx(0.05) and p.max() == 1.0
    assert np.all(np.diff(p) > 0)


def test_manual_up_examples():
    assert order(score_manual_up([3, 1, 2])) == [1, 2, 0]
    assert order(score_manual_up([5, 5, 5])) == [0, 1, 2]
    assert order(score_manual_up([4])) == [0]


def test_rank_examples():
    def s(scores, efforts):
        return ScoredModules(np.array(scores, dtype=float), np.array(efforts, dtype=float), "x")
    assert order(s([0.1, 0.3, 0.2], [1, 1, 1])) == [1, 2, 0]
    assert order(s([0.5, 0.5], [7, 3])) == [1, 0]
    assert order(s([0.5, 0.5], [3, 3])) == [0, 1]
    with pytest.raises(ValueError):
        rank(s([0.1, np.nan], [1, 1]))


def test_dispatch():
    p, e = [0.7, 0.2, 0.4], [3, 1, 2]
    for name in STRATEGIES:
        assert score(name, p, e).strategy == name
    np.testing.assert_array_equal(score("label_loc", p, e).scores, [1 / 3, 0, 0])
    with pytest.raises(ValueError):
        score("random", p, e)


def test_probability_range_checked():
    with pytest.raises(ValueError):
        score_prob([1.2], [1])
    with pytest.raises(ValueError):
        score_ea_z([np.nan], [1])


@settings(max_examples=200)
@given(st.lists(st.integers(1, 10_000), min_size=1, max_size=40), st.floats(0.001, 0.999))
def test_ea_z_with_zero_probs_is_manual_up(efforts, zeta):
    p = np.zeros(len(efforts))
    assert order(score_ea_z(p, efforts, zeta)) == order(score_manual_up(efforts))


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(1, 100), st.integers(1, 1000)), min_size=1, max_size=25))
def test_ea_z_converges_to_prob_loc(rows):
    exact = [Fraction(k, 100) / e for k, e in rows]
    assume(len(set(exact)) == len(exact))
    p = np.array([k / 100 for k, _ in rows])
    e = np.array([e for _, e in rows], dtype=float)
    assert order(score_ea_z(p, e, 1e-12)) == order(score_prob_loc(p, e))


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0.5, 1e4)), min_size=1, max_size=30))
def test_rank_is_a_sorted_permutation(rows):
    p = np.array([r[0] for r in rows])
    e = np.array([r[1] for r in rows])
    for name in ("prob", "prob_loc", "ea_z", "cbs_plus", "manual_up"):
        s = score(name, p, e)
        o = rank(s).order
        assert sorted(o.tolist()) == list(range(len(rows)))
        keys = [(-(s.tiers[i] if s.tiers is not None else 0), -s.scores[i], e[i], i) for i in o]
        assert keys == sorted(keys)


def test_effort_aware_ranker():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 2))
    y = (X[:, 0] > 0).astype(int)
    effort = rng.integers(1, 100, 60).astype(float)
    ranker = EffortAwareRanker(LogisticRegression(), strategy="ea_z", zeta=0.05).fit(X, y)
    p = ranker.predict_proba(X)
    np.testing.assert_allclose(ranker.predict(X, effort), score_ea_z(p, effort).scores)
    assert ranker.get_params()["zeta"] == 0.05
    up = EffortAwareRanker(strategy="manual_up").fit(X, y)
    np.testing.assert_array_equal(up.predict(X, effort), 1 / effort)
