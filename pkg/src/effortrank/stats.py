"""Paired non-parametric comparison statistics and Scott-Knott ESD grouping."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 12
MIN_PAIRS = 5
NEGLIGIBLE_DELTA = 0.147
P_FLOOR = np.finfo(float).tiny


class InsufficientPairsError(ValueError):
    pass


class WilcoxonResult(NamedTuple):
    w: float
    z: float
    p: float
    n: int
    exact: bool


def _exact_upper_counts(doubled_ranks):
    """Number of sign assignments giving each value of the doubled positive-rank sum."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(a, b, alternative="two-sided", exact_max_n=EXACT_MAX_N) -> WilcoxonResult:
    """Wilcoxon signed-rank test of paired samples ``a`` and ``b``.

    Zero differences are dropped and tied magnitudes get average ranks. Up to
    ``exact_max_n`` remaining pairs the p-value comes from the full sign
    enumeration; beyond that from the normal approximation with tie and
    continuity corrections. ``w`` is the positive-rank sum; ``z`` is the
    corrected normal deviate (positive when ``a`` tends to exceed ``b``).
    If every difference is zero the result is ``p = 1, z = 0``.
    """
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d vectors of equal length")
    d = a - b
    d = d[d != 0]
    n = d.size
    if n == 0:
        return WilcoxonResult(0.0, 0.0, 1.0, 0, True)
    if n < MIN_PAIRS:
        raise InsufficientPairsError(f"insufficient pairs: {n} non-zero differences, need {MIN_PAIRS}")

    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    mean = n * (n + 1) / 4.0
    _, ties = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(ties**3 - ties) / 48.0
    dev = w_plus - mean
    dev = math.copysign(max(abs(dev) - 0.5, 0.0), dev)
    z = dev / math.sqrt(var) if var > 0 else 0.0

    if n <= exact_max_n:
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = _exact_upper_counts(doubled)
        s = np.arange(counts.size)
        s_obs = int(doubled[d > 0].sum())
        total = int(doubled.sum())
        if alternative == "two-sided":
            hit = np.abs(2 * s - total) >= abs(2 * s_obs - total)
        elif alternative == "greater":
            hit = s >= s_obs
        else:
            hit = s <= s_obs
        p = counts[hit].sum() / 2.0**n
        exact = True
    else:
        if alternative == "two-sided":
            p = 2.0 * norm.sf(abs(z))
        elif alternative == "greater":
            p = norm.sf(z)
        else:
            p = norm.cdf(z)
        exact = False
    p = float(min(1.0, max(p, P_FLOOR)))
    return WilcoxonResult(w_plus, float(z), p, int(n), exact)


def fdr_adjust(pvals, method="bh"):
    """Step-up false-discovery-rate adjusted p-values, in input order.

    ``method='bh'`` is Benjamini-Hochberg; ``'by'`` adds the Benjamini-Yekutieli
    harmonic factor for arbitrary dependence.
    """
    p = np.asarray(pvals, dtype=float)
    if p.size == 0:
        return p.copy()
    if (p < 0).any() or (p > 1).any() or np.isnan(p).any():
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scale = m / np.arange(1, m + 1)
    if method == "by":
        scale = scale * np.sum(1.0 / np.arange(1, m + 1))
    elif method != "bh":
        raise ValueError(f"unknown FDR method {method!r}")
    stepped = np.minimum.accumulate((p[order] * scale)[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(stepped, 1.0)
    return np.maximum(out, p)


def interpret_r(r):
    r = abs(r)
    if r < 0.1:
        return "trivial"
    if r < 0.3:
        return "small"
    if r < 0.5:
        return "moderate"
    return "large"


def effect_size_r(z, n):
    """r = |z| / sqrt(n) and its conventional label (boundaries belong to the upper class)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    r = abs(z) / math.sqrt(n)
    return r, interpret_r(r)


def wdl(a, b, epsilon=0.0):
    """(wins, draws, losses) of ``a`` against ``b``, pair by pair."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if np.asarray(a).shape != np.asarray(b).shape:
        raise ValueError("paired samples must have equal length")
    wins = int(np.sum(diff > epsilon))
    draws = int(np.sum(np.abs(diff) <= epsilon))
    return wins, draws, int(diff.size - wins - draws)


def cliffs_delta(x, y):
    """P(X > Y) - P(X < Y) over all cross pairs, by sorting rather than pair loops."""
    x = np.asarray(x, dtype=float)
    ys = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or ys.size == 0:
        raise ValueError("Cliff's delta needs two non-empty samples")
    greater = np.searchsorted(ys, x, side="left").sum()
    less = (ys.size - np.searchsorted(ys, x, side="right")).sum()
    return float((greater - less) / (x.size * ys.size))


@dataclass(frozen=True)
class ComparisonRecord:
    method_a: str
    method_b: str
    n: int
    w_statistic: float
    z_value: float
    p_value: float
    p_adjusted: float
    effect_r: float
    interpretation: str
    wdl: tuple
    indicator: str = ""
    note: str = ""


def compare(a, b, method_a, method_b, *, higher_is_better=True, epsilon=0.0,
            alternative="two-sided", indicator="") -> ComparisonRecord:
    """Paired comparison of ``method_a`` against ``method_b``.

    W/D/L counts a win when ``method_a`` is better, so for lower-is-better
    indicators the differences are negated first. Fewer than five non-zero
    differences give a record with NaN statistics and a note.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sign = 1.0 if higher_is_better else -1.0
    record = wdl(sign * a, sign * b, epsilon)
    try:
        w = wilcoxon_signed_rank(sign * a, sign * b, alternative=alternative)
    except InsufficientPairsError as exc:
        return ComparisonRecord(method_a, method_b, a.size, math.nan, math.nan, math.nan,
                                math.nan, math.nan, "", record, indicator, str(exc))
    r, label = effect_size_r(w.z, max(a.size, 1))
    return ComparisonRecord(method_a, method_b, int(a.size), w.w, w.z, w.p, w.p, r, label,
                            record, indicator, "exact" if w.exact else "normal")


def adjust_records(records, method="bh"):
    """Fill ``p_adjusted`` across one family of comparison records."""
    records = list(records)
    idx = [i for i, r in enumerate(records) if not math.isnan(r.p_value)]
    adjusted = fdr_adjust([records[i].p_value for i in idx], method)
    for i, q in zip(idx, adjusted):
        records[i] = replace(records[i], p_adjusted=float(q))
    return records


@dataclass(frozen=True)
class SKGrouping:
    order: tuple
    groups: dict
    means: dict

    @property
    def n_groups(self):
        return max(self.groups.values()) if self.groups else 0


def scott_knott_esd(samples, threshold=NEGLIGIBLE_DELTA) -> SKGrouping:
    """Group methods into contiguous ranks of non-negligibly different performance.

    Methods are sorted by mean score (descending; ties by name). Each block is
    split where the between-group sum of squares of method means is largest,
    and the split is kept only if Cliff's delta between the pooled scores of
    the two sides reaches ``threshold`` in magnitude; otherwise the block is
    one group.
    """
    if not samples:
        raise ValueError("Scott-Knott ESD needs at least one method")
    data = {k: np.asarray(v, dtype=float) for k, v in samples.items()}
    lengths = {v.size for v in data.values()}
    if len(lengths) != 1 or 0 in lengths:
        raise ValueError("every method needs the same, non-zero number of scores")
    means = {k: float(v.mean()) for k, v in data.items()}
    order = sorted(data, key=lambda k: (-means[k], k))

    blocks = []

    def split(block):
        if len(block) < 2:
            blocks.append(block)
            return
        m = np.array([means[k] for k in block])
        grand = m.mean()
        best_i, best_ss = None, -1.0
        for i in range(1, len(block)):
            ss = i * (m[:i].mean() - grand) ** 2 + (len(block) - i) * (m[i:].mean() - grand) ** 2
            if ss > best_ss + 1e-15:
                best_i, best_ss = i, ss
        left, right = block[:best_i], block[best_i:]
        delta = cliffs_delta(np.concatenate([data[k] for k in left]),
                             np.concatenate([data[k] for k in right]))
        if abs(delta) >= threshold:
            split(left)
            split(right)
        else:
            blocks.append(block)

    split(order)
    groups = {k: g for g, block in enumerate(blocks, start=1) for k in block}
    return SKGrouping(tuple(order), groups, means)
