import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from effortrank.stats import (
    InsufficientPairsError, adjust_records, cliffs_delta, compare, effect_size_r, fdr_adjust,
    interpret_r, scott_knott_esd, wdl, wilcoxon_signed_rank,
)

from oracles import bh_oracle, cliffs_delta_pairs, wilcoxon_enumeration


def test_wilcoxon_documented_examples():
    r = wilcoxon_signed_rank([1, 2, 3, 4, 5, 6], [0] * 6)
    assert r.p == 0.03125 and r.exact and r.w == 21.0 and r.n == 6
    r = wilcoxon_signed_rank([3, 1, 4], [3, 1, 4])
    assert (r.p, r.z) == (1.0, 0.0)


def test_wilcoxon_too_few_pairs():
    with pytest.raises(InsufficientPairsError, match="insufficient pairs"):
        wilcoxon_signed_rank([1, 2, 3, 4, 9], [1, 1, 1, 1, 1])


def test_wilcoxon_one_sided():
    a, b = [1, 2, 3, 4, 5, 6], [0] * 6
    assert wilcoxon_signed_rank(a, b, "greater").p == 1 / 64
    assert wilcoxon_signed_rank(a, b, "less").p == 1.0


@pytest.mark.parametrize("seed", range(30))
def test_wilcoxon_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 13))
    a = rng.integers(0, 6, n).astype(float)  # small integers force ties and zeros
    b = rng.integers(0, 6, n).astype(float)
    if np.count_nonzero(a - b) < 5:
        a = a + np.arange(n)
    for alt in ("two-sided", "greater", "less"):
        assert wilcoxon_signed_rank(a, b, alt).p == pytest.approx(
            wilcoxon_enumeration(a, b, alt), abs=1e-12)


def test_wilcoxon_matches_scipy_exact_without_ties():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.normal(size=10), rng.normal(size=10)
        ours = wilcoxon_signed_rank(a, b)
        ref = sps.wilcoxon(a, b, method="exact")
        assert ours.p == pytest.approx(ref.pvalue, abs=1e-12)
        assert min(ours.w, 55 - ours.w) == ref.statistic


def test_wilcoxon_normal_approximation_matches_scipy():
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=40), rng.normal(0.3, size=40)
    ours = wilcoxon_signed_rank(a, b)
    ref = sps.wilcoxon(a, b, method="approx", correction=True)
    assert not ours.exact
    assert ours.p == pytest.approx(ref.pvalue, rel=1e-9)


def test_wilcoxon_exact_for_larger_n_on_request():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=20), rng.normal(0.5, size=20)
    r = wilcoxon_signed_rank(a, b, exact_max_n=30)
    assert r.exact
    assert r.p == pytest.approx(sps.wilcoxon(a, b, method="exact").pvalue, abs=1e-12)


def test_fdr_examples():
    assert fdr_adjust([0.04]).tolist() == [0.04]
    np.testing.assert_allclose(fdr_adjust([0.01, 0.02, 0.03]), [0.03, 0.03, 0.03], rtol=0, atol=1e-17)
    assert fdr_adjust([1.0, 1.0, 1.0]).tolist() == [1.0, 1.0, 1.0]
    assert fdr_adjust([]).size == 0
    with pytest.raises(ValueError):
        fdr_adjust([0.5, 1.2])


def test_by_is_more_conservative():
    p = [0.001, 0.01, 0.02, 0.04]
    assert np.all(fdr_adjust(p, "by") >= fdr_adjust(p, "bh"))
    np.testing.assert_allclose(fdr_adjust(p, "by"),
                               np.minimum(1, fdr_adjust(p, "bh") * sum(1 / k for k in range(1, 5))))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_fdr_properties(p):
    adj = fdr_adjust(p)
    assert np.all(adj >= np.asarray(p))
    assert np.all(adj <= 1)
    np.testing.assert_allclose(adj, bh_oracle(p), rtol=1e-12, atol=1e-300)
    order = np.argsort(p, kind="stable")
    assert np.all(np.diff(adj[order]) >= 0)


def test_effect_size_examples():
    assert effect_size_r(0, 10) == (0.0, "trivial")
    r, label = effect_size_r(1.96, 100)
    assert r == pytest.approx(0.196, abs=1e-15) and label == "small"
    assert effect_size_r(5, 25) == (1.0, "large")
    assert effect_size_r(-3, 100) == (0.3, "moderate")
    assert [interpret_r(x) for x in (0.1, 0.3, 0.5)] == ["small", "moderate", "large"]
    assert interpret_r(0.0999) == "trivial"


def test_wdl_examples():
    assert wdl([1, 2, 3], [1, 1, 4]) == (1, 1, 1)
    assert wdl([0.5] * 4, [0.5] * 4) == (0, 4, 0)
    assert wdl(np.arange(976) + 1.0, np.arange(976)) == (976, 0, 0)
    assert wdl([1.0, 1.05], [1.0, 1.0], epsilon=0.1) == (0, 2, 0)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=20),
       st.lists(st.integers(-5, 5), min_size=1, max_size=20))
def test_cliffs_delta_matches_pair_count(x, y):
    assert cliffs_delta(x, y) == pytest.approx(cliffs_delta_pairs(x, y), abs=1e-15)


def test_compare_orientation():
    a, b = np.arange(10.0), np.arange(10.0) + 1  # a is lower
    up = compare(a, b, "a", "b", higher_is_better=True)
    down = compare(a, b, "a", "b", higher_is_better=False)
    assert up.wdl == (0, 0, 10) and down.wdl == (10, 0, 0)
    assert up.p_value == down.p_value
    assert up.z_value < 0 < down.z_value


def test_compare_small_sample_note():
    rec = compare([1, 2, 3], [0, 0, 0], "a", "b")
    assert math.isnan(rec.p_value) and "insufficient" in rec.note
    assert rec.wdl == (3, 0, 0)


def test_compare_every_cell_better():
    rec = compare(np.linspace(0.5, 0.9, 8), np.linspace(0.1, 0.4, 8), "ea_z", "prob")
    (rec,) = adjust_records([rec])
    assert rec.wdl == (8, 0, 0) and rec.p_adjusted < 0.05


def test_compare_identical():
    rec = compare([0.3] * 9, [0.3] * 9, "x", "y")
    assert rec.wdl == (0, 9, 0) and rec.p_value == 1.0


def test_adjust_records_skips_nan():
    recs = [compare([1, 2, 3], [0, 0, 0], "a", "b"),
            compare(np.arange(8.0) + 1, np.zeros(8), "c", "d"),
            compare(np.arange(8.0), np.arange(8.0)[::-1], "e", "f")]
    out = adjust_records(recs)
    assert math.isnan(out[0].p_adjusted)
    np.testing.assert_allclose([out[1].p_adjusted, out[2].p_adjusted],
                               fdr_adjust([recs[1].p_value, recs[2].p_value]))


def test_scott_knott_examples():
    same = {m: [0.5, 0.6, 0.7] for m in "abc"}
    assert set(scott_knott_esd(same).groups.values()) == {1}
    rng = np.random.default_rng(0)
    hi, lo = 0.9 + rng.random(30) * 0.01, 0.1 + rng.random(30) * 0.01
    g = scott_knott_esd({"lo": lo, "hi": hi})
    assert g.groups == {"hi": 1, "lo": 2}
    assert cliffs_delta(hi, lo) == 1.0 == cliffs_delta_pairs(hi, lo)
    assert scott_knott_esd({"only": [1, 2]}).groups == {"only": 1}
    with pytest.raises(ValueError):
        scott_knott_esd({})


def test_scott_knott_three_tiers_are_contiguous():
    rng = np.random.default_rng(4)
    samples = {f"m{i}": rng.normal(mu, 0.05, 40) for i, mu in enumerate([0.8, 0.79, 0.5, 0.2, 0.21])}
    g = scott_knott_esd(samples)
    assert g.n_groups == 3
    ranks = [g.groups[m] for m in g.order]
    assert ranks == sorted(ranks)
    assert g.groups["m0"] == g.groups["m1"] == 1 and g.groups["m2"] == 2
