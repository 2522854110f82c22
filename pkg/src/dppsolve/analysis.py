"""Beliefs, exact expected costs, best-response oracles, and certification.

All expectations are exact sums over the finite on-path history tree; nothing
is sampled.  Both best responses are independent of the LP machinery: the
attacker side is backward induction over the restricted set with default
continuation values at its boundary, the defender side decomposes per history
because allocations never influence the attacker's motion.
"""

import math
from dataclasses import dataclass, field

from .defaults import ContinuationTable
from .environment import Scenario, action_set
from .sequence_lp import AttackerStrategy, DefenderStrategy

INF = math.inf


class EvaluationError(RuntimeError):
    """Positive probability mass escaped the evaluated history set: the
    strategy under evaluation has not converged."""


def _policy(s: Scenario, att: AttackerStrategy, goal: str, key: str,
            last: str) -> dict[str, float]:
    d = att.policies.get(goal, {}).get(key)
    if d is not None:
        return d
    moves = action_set(s, goal, last)
    return {c: 1.0 / len(moves) for c in moves} if moves else {}


def propagate_beliefs(s: Scenario, att: AttackerStrategy, keys,
                      zero_tol: float = 1e-9) -> dict[str, dict[str, float]]:
    """Posterior over types at every history reached with positive probability.

    Terminated types stay at their goal, so they keep their mass only along the
    stay continuation of the history.
    """
    key_list = sorted(keys, key=lambda k: k.count(">"))
    key_set = set(key_list)
    mass: dict[str, dict[str, float]] = {key_list[0]: dict(att.goal_choice)}
    beliefs: dict[str, dict[str, float]] = {}
    for key in key_list:
        m = mass.get(key)
        if m is None:
            continue
        total = sum(m.values())
        if total <= zero_tol:
            continue
        beliefs[key] = {g: v / total for g, v in m.items()}
        nodes = key.split(">")
        last = nodes[-1]
        for g, mg in m.items():
            if mg <= 0.0:
                continue
            if g in nodes:
                # terminated type: stays at its goal
                child = f"{key}>{last}"
                if last == g and child in key_set:
                    mass.setdefault(child, {}).setdefault(g, 0.0)
                    mass[child][g] += mg
                continue
            for c, p in _policy(s, att, g, key, last).items():
                if p <= 0.0:
                    continue
                child = f"{key}>{c}"
                if child in key_set:
                    mass.setdefault(child, {}).setdefault(g, 0.0)
                    mass[child][g] += mg * p
    return beliefs


def expected_cost(s: Scenario, defender: DefenderStrategy, att: AttackerStrategy,
                  goal: str, keys: set[str], zero_tol: float = 1e-9) -> float:
    """Exact expected cost of the given type under both strategies.

    Requires the type's walk to terminate inside the evaluated history set.
    """
    r = s.allocation(goal)
    if goal == s.start:
        return r

    def rec(key: str, last: str) -> float:
        total = 0.0
        for c, p in _policy(s, att, goal, key, last).items():
            if p <= 0.0:
                continue
            step = defender.prob(key, last, goal) * s.weight(last, c)
            if c == goal:
                total += p * step
                continue
            child = f"{key}>{c}"
            if child not in keys:
                if p > zero_tol:
                    raise EvaluationError(
                        f"type {goal!r} leaves the evaluated set at {key!r}->{c!r}")
                continue
            total += p * (step + rec(child, c))
        return total

    return r + rec(s.start, s.start)


def attacker_best_response(s: Scenario, defender: DefenderStrategy,
                           table: ContinuationTable, keys: set[str]
                           ) -> tuple[dict[str, float], float]:
    """Optimal cost per type against a fixed defense, and the best over types.

    Inside the evaluated set the defense is read from the strategy; one step
    outside, the remaining cost is the default-play continuation value.
    """
    per_type: dict[str, float] = {}
    for goal in s.goals:
        if goal == s.start:
            per_type[goal] = s.allocation(goal)
            continue

        def rec(key: str, last: str) -> float:
            best = INF
            for c in s.out_neighbors(last):
                step = defender.prob(key, last, goal) * s.weight(last, c)
                if c == goal:
                    cand = step
                else:
                    child = f"{key}>{c}"
                    if child in keys:
                        cand = step + rec(child, c)
                    else:
                        cand = step + table.values[goal][c]
                if cand < best:
                    best = cand
            return best

        per_type[goal] = rec(s.start, s.start) + s.allocation(goal)
    overall = min(per_type.values())
    return per_type, overall


def defender_best_response(s: Scenario, att: AttackerStrategy, keys: set[str],
                           zero_tol: float = 1e-9) -> tuple[dict[str, str], float]:
    """Myopic per-history maximization; exact because allocations never move the game."""
    choices: dict[str, str] = {}
    value = sum(att.goal_choice.get(g, 0.0) * s.allocation(g) for g in s.goals)

    def rec(key: str, last: str, m: dict[str, float]) -> float:
        gains = {g: 0.0 for g in s.goals}
        flows: dict[str, dict[str, float]] = {}
        nodes_seen = key.split(">")
        for g, mg in m.items():
            if mg <= zero_tol or g in nodes_seen:
                continue
            for c, p in _policy(s, att, g, key, last).items():
                if p <= 0.0:
                    continue
                gains[g] += mg * p * s.weight(last, c)
                if c != g:
                    child = f"{key}>{c}"
                    if child not in keys:
                        if mg * p > zero_tol:
                            raise EvaluationError(
                                f"type {g!r} leaves the evaluated set at {key!r}->{c!r}")
                        continue
                    flows.setdefault(c, {}).setdefault(g, 0.0)
                    flows[c][g] += mg * p
        best_goal = max(s.goals, key=lambda g: (gains[g], -s.goal_index(g)))
        total = gains[best_goal]
        if total > 0.0:
            choices[key] = best_goal
        for c, child_mass in sorted(flows.items()):
            total += rec(f"{key}>{c}", c, child_mass)
        return total

    root_mass = {g: att.goal_choice.get(g, 0.0) for g in s.goals if g != s.start}
    value += rec(s.start, s.start, root_mass)
    return choices, value


@dataclass
class IndifferenceReport:
    type_spread: float
    trajectory_spread: dict[str, float]
    violations: list[str] = field(default_factory=list)
    tolerance: float = 1e-6


@dataclass
class VerificationReport:
    attacker_gap: float
    defender_gap: float
    expected_value: float
    per_type_costs: dict[str, float | None]
    indifference: IndifferenceReport
    certified: bool
    tolerance: float
    duality_gap: float | None = None


def trajectory_costs(s: Scenario, defender: DefenderStrategy, att: AttackerStrategy,
                     goal: str, keys: set[str], zero_tol: float = 1e-9
                     ) -> list[tuple[str, float, float]]:
    """(terminal history, probability, realized expected cost) for one type."""
    out = []
    r = s.allocation(goal)
    if goal == s.start:
        return [(s.start, 1.0, r)]

    def rec(key: str, last: str, prob: float, acc: float):
        for c, p in _policy(s, att, goal, key, last).items():
            if p <= zero_tol:
                continue
            step = defender.prob(key, last, goal) * s.weight(last, c)
            child = f"{key}>{c}"
            if c == goal:
                out.append((child, prob * p, acc + step + r))
                continue
            if child not in keys:
                raise EvaluationError(
                    f"type {goal!r} leaves the evaluated set at {key!r}->{c!r}")
            rec(child, c, prob * p, acc + step)

    rec(s.start, s.start, 1.0, 0.0)
    return out


def check_indifference(s: Scenario, defender: DefenderStrategy, att: AttackerStrategy,
                       keys: set[str], per_type_costs: dict[str, float | None],
                       tol: float = 1e-6, zero_tol: float = 1e-9) -> IndifferenceReport:
    """On-path indifference: chosen types tie in cost, and each chosen type's
    positive-probability terminal trajectories tie in realized cost."""
    support = att.support(zero_tol)
    costs = [per_type_costs[g] for g in support if per_type_costs.get(g) is not None]
    type_spread = (max(costs) - min(costs)) if len(costs) > 1 else 0.0
    violations = []
    if type_spread > tol:
        violations.append(f"chosen-type costs differ by {type_spread:.3e}")
    traj_spread: dict[str, float] = {}
    for g in support:
        tc = [c for _, p, c in trajectory_costs(s, defender, att, g, keys, zero_tol)
              if p > zero_tol]
        spread = (max(tc) - min(tc)) if len(tc) > 1 else 0.0
        traj_spread[g] = spread
        if spread > tol:
            violations.append(f"type {g!r} trajectory costs differ by {spread:.3e}")
    return IndifferenceReport(type_spread, traj_spread, violations, tol)


def verify_equilibrium(s: Scenario, defender: DefenderStrategy, att: AttackerStrategy,
                       table: ContinuationTable, keys: set[str],
                       tol: float = 1e-6, zero_tol: float = 1e-9,
                       duality_gap: float | None = None) -> VerificationReport:
    """Best-response gaps on both sides plus the indifference checks.

    Certification only attests the two gap inequalities; the indifference
    report is informative.
    """
    support = att.support(zero_tol)
    per_type: dict[str, float | None] = {}
    value = 0.0
    for g in s.goals:
        if g in support:
            per_type[g] = expected_cost(s, defender, att, g, keys, zero_tol)
            value += att.goal_choice[g] * per_type[g]
        else:
            per_type[g] = None
    _, br_attacker = attacker_best_response(s, defender, table, keys)
    _, br_defender = defender_best_response(s, att, keys, zero_tol)
    attacker_gap = value - br_attacker
    defender_gap = br_defender - value
    indiff = check_indifference(s, defender, att, keys, per_type, tol, zero_tol)
    certified = attacker_gap <= tol and defender_gap <= tol
    return VerificationReport(
        attacker_gap=attacker_gap, defender_gap=defender_gap,
        expected_value=value, per_type_costs=per_type, indifference=indiff,
        certified=certified, tolerance=tol, duality_gap=duality_gap)
