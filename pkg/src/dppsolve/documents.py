"""Solution-document serialization and validation.

Numbers are written with 12 significant digits: below every tolerance in use,
above float noise, and byte-stable across runs.  Attacker policies are written
only where the solve placed realization mass; at every other history the
strategy is the uniform fallback, which readers reconstruct implicitly.
"""

import json

from .analysis import VerificationReport
from .environment import Scenario
from .metrics import MetricsReport
from .sequence_lp import AttackerStrategy, DefenderStrategy


class DocumentError(ValueError):
    """A solution document is malformed or does not match its scenario."""


def round_sig(x: float, sig: int = 12) -> float:
    if x == 0.0:
        return 0.0
    return float(f"{x:.{sig}g}")


def _num(x):
    return None if x is None else round_sig(float(x))


def _dist(d: dict[str, float]) -> dict[str, float]:
    return {k: round_sig(v) for k, v in d.items() if v > 0.0}


def solution_document(sol, report: VerificationReport, metrics: MetricsReport,
                      zero_tol: float = 1e-9) -> dict:
    s: Scenario = sol.scenario
    att: AttackerStrategy = sol.attacker
    policies = {}
    for g in s.goals:
        per_goal = {}
        for key, dist in att.policies.get(g, {}).items():
            plan = att.plans[g].get(key) if att.plans else None
            if plan is not None and sum(plan.values()) > zero_tol:
                per_goal[key] = _dist(dist)
        policies[g] = per_goal
    return {
        "value": round_sig(sol.value),
        "gamma_type": {g: round_sig(att.goal_choice.get(g, 0.0)) for g in s.goals},
        "attacker_policies": policies,
        "defender_policy": {key: _dist(d) for key, d in sol.defender.allocation.items()},
        "beliefs": {key: _dist(d) for key, d in sol.beliefs.items()},
        "verification": {
            "attacker_gap": _num(report.attacker_gap),
            "defender_gap": _num(report.defender_gap),
            "expected_value": _num(report.expected_value),
            "per_type_costs": {g: _num(v) for g, v in report.per_type_costs.items()},
            "indifference": {
                "type_spread": _num(report.indifference.type_spread),
                "trajectory_spread": {g: _num(v) for g, v in
                                      report.indifference.trajectory_spread.items()},
                "violations": list(report.indifference.violations),
                "tolerance": _num(report.indifference.tolerance),
            },
            "duality_gap": _num(report.duality_gap),
            "certified": bool(report.certified),
            "tolerance": _num(report.tolerance),
            "iterations": sol.iterations,
        },
        "metrics": {
            "support": list(metrics.support),
            "complete_info": {"per_type": {g: _num(v) for g, v in metrics.complete_info.items()},
                              "overall": _num(metrics.complete_info_overall)},
            "expected_traversal": {g: _num(v) for g, v in metrics.traversal.items()},
            "rod": {"per_type": {g: _num(v) for g, v in metrics.rod.items()},
                    "overall": _num(metrics.rod_overall)},
            "voi": {"per_type": {g: _num(v) for g, v in metrics.voi.items()},
                    "overall": _num(metrics.voi_overall)},
        },
        "restricted_histories": sol.restricted.keys(),
    }


def dumps_solution(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _check_dist(d, label):
    if not isinstance(d, dict):
        raise DocumentError(f"{label} is not a distribution object")
    total = 0.0
    for k, v in d.items():
        v = float(v)
        if v < -1e-9:
            raise DocumentError(f"{label} has negative probability on {k!r}")
        total += v
    if abs(total - 1.0) > 1e-6:
        raise DocumentError(f"{label} sums to {total}, expected 1")


def parse_solution(doc: dict, s: Scenario):
    """Validate a solution document against its scenario and rebuild strategies.

    Returns (value, attacker, defender_allocation, history keys).
    """
    if not isinstance(doc, dict):
        raise DocumentError("solution document must be a JSON object")
    for field in ("value", "gamma_type", "attacker_policies", "defender_policy",
                  "restricted_histories"):
        if field not in doc:
            raise DocumentError(f"missing field {field!r}")
    keys = list(doc["restricted_histories"])
    if not keys or keys[0] != s.start:
        raise DocumentError("restricted histories do not begin at the scenario start")
    key_set = set(keys)
    node_set = set(s.nodes)
    goal_set = set(s.goals)
    for key in keys:
        nodes = key.split(">")
        if nodes[0] != s.start:
            raise DocumentError(f"history {key!r} does not start at {s.start!r}")
        for u, v in zip(nodes, nodes[1:]):
            if v not in node_set:
                raise DocumentError(f"history {key!r} references unknown node {v!r}")
            if (u, v) not in s.edges and not (u == v and u in goal_set):
                raise DocumentError(f"history {key!r} contains illegal move {u!r}->{v!r}")

    gamma = doc["gamma_type"]
    for g in gamma:
        if g not in goal_set:
            raise DocumentError(f"gamma_type references non-goal {g!r}")
    choice = {g: float(gamma.get(g, 0.0)) for g in s.goals}
    _check_dist(choice, "gamma_type")

    policies: dict[str, dict[str, dict[str, float]]] = {}
    for g, per_goal in doc["attacker_policies"].items():
        if g not in goal_set:
            raise DocumentError(f"attacker policy for non-goal {g!r}")
        policies[g] = {}
        for key, dist in per_goal.items():
            if key not in key_set:
                raise DocumentError(f"attacker policy at unknown history {key!r}")
            _check_dist(dist, f"policy of {g!r} at {key!r}")
            policies[g][key] = {c: float(p) for c, p in dist.items()}

    allocation: dict[str, dict[str, float]] = {}
    for key, dist in doc["defender_policy"].items():
        if key not in key_set:
            raise DocumentError(f"defender policy at unknown history {key!r}")
        _check_dist(dist, f"allocation at {key!r}")
        allocation[key] = {g: float(p) for g, p in dist.items()}

    attacker = AttackerStrategy(choice, policies, plans=None)
    return float(doc["value"]), attacker, allocation, keys
