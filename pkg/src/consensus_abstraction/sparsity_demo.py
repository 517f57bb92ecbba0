"""Closed-form example: l1-regularized H2 design keeps the complete graph.

Start from the complete graph with identical weights ``w0``. The l1-relaxed
problem has a unique optimum that is again complete with identical weights,
while the l0 problem is driven toward a spanning tree with unbounded weights.
Everything here is evaluated in closed form; no solver is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generators import complete, star
from .graph import sparsity_l0
from .measures import view


class InfeasibleRegularization(ValueError):
    pass


@dataclass(frozen=True)
class RegularizationInstance:
    n: int
    w0: float
    gamma: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need n >= 3, got {self.n}")
        if not self.w0 > 0:
            raise ValueError("w0 must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def feasibility_threshold(self) -> float:
        """``1 / (8 n^2 w0^2)``; the closed-form optimum needs ``gamma`` above it."""
        return 1.0 / (8 * self.n**2 * self.w0**2)


def l1_cost(L, gamma: float) -> float:
    """Relaxed objective ``1/2 sum lambda_i^-1 + gamma sum lambda_i``.

    The penalty weight on ``tr(L)`` is ``gamma``; with it the AM-GM bound
    ``(n - 1) sqrt(2 gamma)`` is tight (see the notes for the factor).
    """
    lam = view(L).positive_eigenvalues()
    return 0.5 * float(np.sum(1.0 / lam)) + gamma * float(np.sum(lam))


def l1_lower_bound(inst: RegularizationInstance) -> float:
    return (inst.n - 1) * math.sqrt(2 * inst.gamma)


def l0_lower_bound(inst: RegularizationInstance) -> float:
    """Infimum ``gamma (n - 1)`` of the l0 objective (approached, never attained)."""
    return inst.gamma * (inst.n - 1)


def l1_optimum(inst: RegularizationInstance) -> tuple[float, float]:
    """Remaining uniform link weight ``1 / (n sqrt(2 gamma))`` and its cost."""
    if not inst.gamma > inst.feasibility_threshold:
        raise InfeasibleRegularization(
            f"gamma={inst.gamma} must exceed 1/(8 n^2 w0^2) = {inst.feasibility_threshold:.6g}"
        )
    w_star = 1.0 / (inst.n * math.sqrt(2 * inst.gamma))
    return w_star, l1_lower_bound(inst)


def l1_solution(inst: RegularizationInstance):
    w_star, _ = l1_optimum(inst)
    return complete(inst.n, w_star)


def l0_tree_cost(inst: RegularizationInstance, weight_scale: float) -> float:
    """``||G||^2 + (gamma/2) ||A||_l0`` for a star with all weights ``weight_scale``."""
    if not weight_scale > 0:
        raise ValueError("weight_scale must be positive")
    g = star(inst.n, weight_scale)
    h2_sq = 0.5 * float(np.sum(1.0 / view(g).positive_eigenvalues()))
    return h2_sq + 0.5 * inst.gamma * sparsity_l0(g)


def demo_report(inst: RegularizationInstance, weight_scales=(1.0, 10.0, 100.0, 1000.0)) -> dict:
    w_star, cost = l1_optimum(inst)
    sol = l1_solution(inst)
    tree = star(inst.n)
    return {
        "n": inst.n,
        "w0": inst.w0,
        "gamma": inst.gamma,
        "l1": {
            "remaining_weight": w_star,
            "removed_weight": inst.w0 - w_star,
            "cost": cost,
            "cost_evaluated": l1_cost(sol, inst.gamma),
            "nonzeros": sparsity_l0(sol),
            "topology": "complete",
        },
        "l0": {
            "infimum": l0_lower_bound(inst),
            "attained": False,
            "nonzeros": sparsity_l0(tree),
            "topology": "star",
            "tree_costs": [
                {"weight_scale": s, "cost": l0_tree_cost(inst, s)} for s in weight_scales
            ],
        },
        "lower_bounds_coincide": math.isclose(
            l1_lower_bound(inst), l0_lower_bound(inst), rel_tol=0, abs_tol=1e-12
        ),
    }


def format_demo(report: dict) -> str:
    l1, l0 = report["l1"], report["l0"]
    lines = [
        f"complete graph n={report['n']}, w0={report['w0']:g}, gamma={report['gamma']:g}",
        f"l1 optimum: complete graph, remaining weight {l1['remaining_weight']:.17g}",
        f"  cost {l1['cost']:.17g} (evaluated {l1['cost_evaluated']:.17g})",
        f"  nonzeros {l1['nonzeros']}",
        f"l0 infimum: spanning star, cost -> {l0['infimum']:.17g} as weights grow (not attained)",
        f"  nonzeros {l0['nonzeros']}",
    ]
    for row in l0["tree_costs"]:
        lines.append(f"  star weight {row['weight_scale']:g}: cost {row['cost']:.17g}")
    lines.append(f"lower bounds coincide: {'yes' if report['lower_bounds_coincide'] else 'no'}")
    return "\n".join(lines)
