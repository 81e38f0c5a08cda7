"""A four-module example of the ranking instability of prob/effort near zero probability.

Three small defective modules and one large clean module. The third defective
module (8 lines) is predicted with p = 0.02 in one run and p = 0.01 in
another; under prob/effort the 0.01 version drops behind the 100-line clean
module, and Recall@20% falls from 1.0 to 2/3. Lifting probabilities to at
least zeta keeps it ahead in both runs.
"""
from __future__ import annotations

import numpy as np

from .metrics import ce_curve, recall_at
from .strategies import DEFAULT_ZETA, rank, score_ea_z, score_prob_loc

NAMES = ("A", "B", "C", "D")
EFFORTS = np.array([2.0, 4.0, 8.0, 100.0])
ACTUALS = np.array([True, True, True, False])
PROBS_UPPER = np.array([0.8, 0.6, 0.02, 0.2])
PROBS_LOWER = np.array([0.8, 0.6, 0.01, 0.2])


def fixture():
    return {
        "names": NAMES,
        "efforts": EFFORTS.copy(),
        "actuals": ACTUALS.copy(),
        "probs_upper": PROBS_UPPER.copy(),
        "probs_lower": PROBS_LOWER.copy(),
    }


def evaluate_fixture(zeta=DEFAULT_ZETA, budget=0.2):
    """Rankings and Recall@budget of both probability vectors under prob/effort and EA-Z."""
    out = {}
    for label, probs in (("upper", PROBS_UPPER), ("lower", PROBS_LOWER)):
        for strategy, scored in (
            ("prob_loc", score_prob_loc(probs, EFFORTS)),
            ("ea_z", score_ea_z(probs, EFFORTS, zeta)),
        ):
            r = rank(scored)
            out[(strategy, label)] = {
                "order": r.order,
                "scores": scored.scores,
                "recall": recall_at(r, ACTUALS, EFFORTS, budget),
                "curve": ce_curve(r, ACTUALS, EFFORTS),
            }
    return out


def report(zeta=DEFAULT_ZETA, budget=0.2) -> str:
    res = evaluate_fixture(zeta, budget)
    lines = [
        "Minor Chaos example: one probability changes from 0.02 to 0.01",
        "module  effort  defective  p(upper)  p(lower)",
    ]
    for i, name in enumerate(NAMES):
        lines.append(
            f"{name:>6}  {EFFORTS[i]:6.0f}  {'yes' if ACTUALS[i] else 'no':>9}"
            f"  {PROBS_UPPER[i]:8.2f}  {PROBS_LOWER[i]:8.2f}"
        )
    lines.append(f"inspection budget: {budget:.0%} of {EFFORTS.sum():.0f} lines")
    for strategy, title in (("prob_loc", "Prob/LOC"), ("ea_z", f"EA-Z (zeta={zeta:g})")):
        lines.append("")
        lines.append(title)
        for label in ("upper", "lower"):
            r = res[(strategy, label)]
            order = " > ".join(NAMES[i] for i in r["order"])
            scores = ", ".join(f"{NAMES[i]}={r['scores'][i]:.6g}" for i in r["order"])
            lines.append(f"  {label:<5}  order {order:<16} recall@{budget:.0%} = {r['recall']:.2f}")
            lines.append(f"         scores {scores}")
    return "\n".join(lines)
