"""Effort-aware evaluation on the cost-effectiveness (CE) curve.

The CE curve walks a ranking and plots the cumulative share of raw effort
(x) against the cumulative share of defective modules found (y). Recall is
counted in modules, not bug multiplicities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BOUNDARY_SLACK = 1e-12


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CECurve:
    effort: np.ndarray
    recall: np.ndarray

    @property
    def points(self):
        return list(zip(self.effort.tolist(), self.recall.tolist()))

    def __call__(self, x):
        """Recall at effort fraction ``x`` by linear interpolation between points."""
        return np.interp(x, self.effort, self.recall)

    def area(self):
        return float(np.sum(np.diff(self.effort) * (self.recall[1:] + self.recall[:-1])) / 2.0)


@dataclass(frozen=True)
class EvalResult:
    recall20: float
    popt: float
    ifa: int
    no_defect: bool = False
    strategy: str = ""
    learner: str = ""
    pair: str = ""


def _order(r):
    return np.asarray(getattr(r, "order", r), dtype=int)


def _inputs(r, actuals, efforts):
    order = _order(r)
    actual = np.asarray(actuals, dtype=bool)
    effort = np.asarray(efforts, dtype=float)
    n = actual.size
    if effort.size != n or order.size != n:
        raise ValueError("ranking, actuals and efforts must have the same length")
    if n and not np.array_equal(np.sort(order), np.arange(n)):
        raise ValueError("ranking is not a permutation of the record indices")
    if (effort <= 0).any() or not np.all(np.isfinite(effort)):
        raise ValueError("efforts must be positive and finite")
    return order, actual[order], effort[order]


def ce_curve(r, actuals, efforts) -> CECurve:
    order, act, eff = _inputs(r, actuals, efforts)
    K = int(act.sum())
    if K == 0:
        raise UndefinedMetricError("no defective module: undefined recall denominator")
    x = np.concatenate([[0.0], np.cumsum(eff) / eff.sum()])
    y = np.concatenate([[0.0], np.cumsum(act) / K])
    x[-1] = 1.0
    return CECurve(x, y)


def recall_at(r, actuals, efforts, budget=0.2) -> float:
    """Share of defective modules fully inspected within ``budget`` of total effort.

    A module counts only if the cumulative effort up to and including it is
    within the budget (plus 1e-12 slack); a module straddling the boundary
    earns no partial credit.
    """
    if not 0.0 < budget <= 1.0:
        raise ValueError("budget must lie in (0, 1]")
    order, act, eff = _inputs(r, actuals, efforts)
    K = int(act.sum())
    if K == 0:
        raise UndefinedMetricError("no defective module: undefined recall denominator")
    cum = np.cumsum(eff)
    inspected = cum <= budget * cum[-1] + BOUNDARY_SLACK * max(1.0, cum[-1])
    if budget == 1.0:
        inspected[:] = True
    return float(act[inspected].sum() / K)


def optimal_order(actuals, efforts):
    """Defective modules first by effort ascending, then clean modules by effort ascending."""
    actual = np.asarray(actuals, dtype=bool)
    effort = np.asarray(efforts, dtype=float)
    return np.lexsort((np.arange(actual.size), effort, ~actual))


def worst_order(actuals, efforts):
    """Clean modules first, then defective modules by effort descending."""
    actual = np.asarray(actuals, dtype=bool)
    effort = np.asarray(efforts, dtype=float)
    return np.lexsort((np.arange(actual.size), -effort, actual))


def popt(r, actuals, efforts) -> float:
    """Normalized area score: 1 - (A_opt - A_model) / (A_opt - A_worst), trapezoidal areas."""
    actual = np.asarray(actuals, dtype=bool)
    a_model = ce_curve(r, actual, efforts).area()
    a_opt = ce_curve(optimal_order(actual, efforts), actual, efforts).area()
    a_worst = ce_curve(worst_order(actual, efforts), actual, efforts).area()
    if not a_opt - a_worst > 0:
        raise UndefinedMetricError("degenerate normalization: optimal and worst areas coincide")
    return float(1.0 - (a_opt - a_model) / (a_opt - a_worst))


def ifa(r, actuals) -> int:
    """Clean modules inspected before the first defective one.

    Returns the module count when nothing is defective (see :func:`evaluate`,
    which flags that case).
    """
    act = np.asarray(actuals, dtype=bool)[_order(r)]
    hits = np.flatnonzero(act)
    return int(hits[0]) if hits.size else int(act.size)


def evaluate(r, actuals, efforts, budget=0.2, **tags) -> EvalResult:
    """Recall@budget, Popt and IFA for one ranking."""
    actual = np.asarray(actuals, dtype=bool)
    if not actual.any():
        raise UndefinedMetricError("no defective module: undefined recall denominator")
    return EvalResult(
        recall20=recall_at(r, actual, efforts, budget),
        popt=popt(r, actual, efforts),
        ifa=ifa(r, actual),
        **tags,
    )
