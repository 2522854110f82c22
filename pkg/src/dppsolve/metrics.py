"""Complete-information benchmark and the two deception metrics.

The benchmark for a type is its weighted shortest distance plus its initial
allocation: what the attacker pays when the defense knows the goal from the
start.  Risk of deception is the traversal cost the equilibrium route adds on
top of that benchmark; value of information is the normalized saving the
equilibrium achieves below it.
"""

import warnings
from dataclasses import dataclass

from .analysis import _policy
from .environment import Scenario, UnreachableError, shortest_distance
from .sequence_lp import AttackerStrategy


@dataclass
class MetricsReport:
    support: tuple[str, ...]
    complete_info: dict[str, float]          # per type
    complete_info_overall: float
    traversal: dict[str, float | None]       # per type, None off support
    rod: dict[str, float | None]
    rod_overall: float
    voi: dict[str, float | None]
    voi_overall: float


def complete_info_value(s: Scenario, goal: str) -> float:
    return shortest_distance(s, s.start, goal) + s.allocation(goal)


def complete_info_overall(s: Scenario) -> float:
    best = None
    for g in s.goals:
        try:
            v = complete_info_value(s, g)
        except UnreachableError:
            warnings.warn(f"goal {g!r} unreachable from start; excluded from benchmark")
            continue
        best = v if best is None else min(best, v)
    if best is None:
        raise UnreachableError("no goal reachable from start")
    return best


def expected_traversal(s: Scenario, att: AttackerStrategy, goal: str,
                       keys: set[str], zero_tol: float = 1e-9) -> float:
    """Expected cumulative edge weight of the type's walk, plus its allocation."""
    from .analysis import EvaluationError

    r = s.allocation(goal)
    if goal == s.start:
        return r

    def rec(key: str, last: str) -> float:
        total = 0.0
        for c, p in _policy(s, att, goal, key, last).items():
            if p <= 0.0:
                continue
            w = s.weight(last, c)
            if c == goal:
                total += p * w
                continue
            child = f"{key}>{c}"
            if child not in keys:
                if p > zero_tol:
                    raise EvaluationError(
                        f"type {goal!r} leaves the evaluated set at {key!r}->{c!r}")
                continue
            total += p * (w + rec(child, c))
        return total

    return r + rec(s.start, s.start)


def risk_of_deception(s: Scenario, att: AttackerStrategy, keys: set[str],
                      zero_tol: float = 1e-9) -> tuple[dict[str, float | None], float]:
    """Per chosen type: expected route cost minus the benchmark; overall is the
    choice-weighted sum.  Types never chosen report None."""
    support = att.support(zero_tol)
    per_type: dict[str, float | None] = {}
    overall = 0.0
    for g in s.goals:
        if g in support:
            rod = expected_traversal(s, att, g, keys, zero_tol) - complete_info_value(s, g)
            per_type[g] = rod
            overall += att.goal_choice[g] * rod
        else:
            per_type[g] = None
    return per_type, overall


def value_of_information(s: Scenario, att: AttackerStrategy,
                         per_type_costs: dict[str, float | None], value: float,
                         zero_tol: float = 1e-9) -> tuple[dict[str, float | None], float]:
    """Normalized advantage of keeping the goal private; zero when the benchmark
    is zero (the game ends immediately)."""
    support = att.support(zero_tol)
    per_type: dict[str, float | None] = {}
    for g in s.goals:
        if g in support and per_type_costs.get(g) is not None:
            ubar = complete_info_value(s, g)
            per_type[g] = 0.0 if ubar <= 0.0 else (ubar - per_type_costs[g]) / ubar
        else:
            per_type[g] = None
    ubar_star = complete_info_overall(s)
    overall = 0.0 if ubar_star <= 0.0 else (ubar_star - value) / ubar_star
    return per_type, overall


def compute_metrics(s: Scenario, att: AttackerStrategy, keys: set[str],
                    per_type_costs: dict[str, float | None], value: float,
                    zero_tol: float = 1e-9) -> MetricsReport:
    support = att.support(zero_tol)
    complete = {g: complete_info_value(s, g) for g in s.goals}
    traversal = {g: (expected_traversal(s, att, g, keys, zero_tol) if g in support else None)
                 for g in s.goals}
    rod, rod_overall = risk_of_deception(s, att, keys, zero_tol)
    voi, voi_overall = value_of_information(s, att, per_type_costs, value, zero_tol)
    return MetricsReport(
        support=support,
        complete_info=complete,
        complete_info_overall=complete_info_overall(s),
        traversal=traversal,
        rod=rod,
        rod_overall=rod_overall,
        voi=voi,
        voi_overall=voi_overall,
    )
