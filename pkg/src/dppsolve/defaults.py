"""Default play outside the restricted game and the continuation values it induces.

Off the restricted history set the defender allocates to the goal currently
closest to the attacker (first-listed goal on exact distance ties).  Each
attacker type best-responds to that rule; the best-response value at a node is
the continuation cost charged when the restricted game is truncated there.
"""

import math
from dataclasses import dataclass

from .environment import Scenario, distances_to

INF = math.inf


class UnreachableGoalError(ValueError):
    """A continuation value was requested at a node that cannot reach the goal."""


@dataclass(frozen=True)
class ContinuationTable:
    """Per-type best-response values and default policies against default defense.

    values[goal][node] is the optimal remaining cost for that type starting at
    node; math.inf where the goal is unreachable.  policy[goal][node] is the
    default next move (absent at the goal itself and at unreachable nodes).
    defender_goal[node] is the default allocation target at that node.
    """
    values: dict[str, dict[str, float]]
    policy: dict[str, dict[str, str]]
    defender_goal: dict[str, str]
    delta: float | None = None

    def value(self, goal: str, node: str) -> float:
        return self.values[goal][node]


def defender_default(s: Scenario, at: str) -> str:
    """Closest goal to the node, first-listed on ties; measured by weighted distance."""
    best, best_d = None, INF
    for g in s.goals:
        d = distances_to(s, g).get(at, INF)
        if d < best_d:
            best, best_d = g, d
    return best if best is not None else s.goals[0]


def _default_goal_map(s: Scenario) -> dict[str, str]:
    per_goal = {g: distances_to(s, g) for g in s.goals}
    out = {}
    for v in s.nodes:
        best, best_d = s.goals[0], per_goal[s.goals[0]].get(v, INF)
        for g in s.goals[1:]:
            d = per_goal[g].get(v, INF)
            if d < best_d:
                best, best_d = g, d
        out[v] = best
    return out


def build_continuation(s: Scenario, goal: str, defender_goal: dict[str, str],
                       delta: float | None = None):
    """Value-iterate the type's shortest-path problem against the default defense.

    Edge cost is the traversal weight when the default defense sits on this
    type's goal and zero otherwise.  Without delta, values are ordered
    lexicographically by (cost, hops) so the policy makes hop progress across
    zero-cost plateaus without perturbing the values.  With delta, the additive
    perturbation variant is used instead and values include the delta terms.
    """
    order = s.nodes
    dist: dict[str, tuple[float, float]] = {v: (INF, INF) for v in order}
    dist[goal] = (0.0, 0.0)
    policy: dict[str, str] = {}

    def edge_cost(u, v):
        c = s.edges[(u, v)] if defender_goal[u] == goal else 0.0
        return c + delta if delta is not None else c

    tol = 1e-12 if delta is not None else 0.0

    def better(a, b):
        return a[0] < b[0] - tol or (a[0] <= b[0] + tol and a[1] < b[1])

    for _ in range(len(order) + 1):
        changed = False
        for u in order:
            if u == goal:
                continue
            best, best_v = (INF, INF), None
            for v in s.out_neighbors(u):
                cv, hv = dist[v]
                if cv == INF:
                    continue
                cand = (edge_cost(u, v) + cv, hv + 1.0)
                if better(cand, best):
                    best, best_v = cand, v
            if best_v is not None and better(best, dist[u]):
                dist[u] = best
                policy[u] = best_v
                changed = True
        if not changed:
            break

    values = {v: dist[v][0] for v in order}
    return values, policy


def build_table(s: Scenario, delta: float | None = None) -> ContinuationTable:
    if delta is not None and delta <= 0.0:
        delta = 1e-6 * min(s.edges.values())
    defender_goal = _default_goal_map(s)
    values, policy = {}, {}
    for g in s.goals:
        values[g], policy[g] = build_continuation(s, g, defender_goal, delta)
    return ContinuationTable(values, policy, defender_goal, delta)


def continuation_cost(tbl: ContinuationTable, goal: str, history_nodes) -> float:
    """Continuation value at a truncated history; depends only on its last node."""
    v = tbl.values[goal][history_nodes[-1]]
    if v == INF:
        raise UnreachableGoalError(
            f"goal {goal!r} unreachable from {history_nodes[-1]!r}")
    return v
