"""Prefix-closed history sets and per-type stage matrices for the truncated game.

Histories are sequences of attacker positions starting at the scenario start.
The restricted game keeps a finite prefix-closed set of them; histories at the
truncation boundary are charged a continuation value for the move that leaves
the set.  Each history is keyed by its nodes joined with ">".
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .defaults import ContinuationTable
from .environment import Scenario, action_set

INF = math.inf


def history_key(nodes) -> str:
    return ">".join(nodes)


def history_nodes(key: str) -> tuple[str, ...]:
    return tuple(key.split(">"))


def is_prefix(a, b) -> bool:
    """True iff history a is an initial segment of history b (reflexive)."""
    a, b = tuple(a), tuple(b)
    return len(a) <= len(b) and b[: len(a)] == a


@dataclass
class _Hist:
    nodes: tuple[str, ...]
    key: str
    depth: int                      # number of moves taken
    visited_goals: frozenset[str]   # goals touched by any prefix
    edge_walk: bool                 # every step is a graph edge (no goal-stay steps)
    children: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class StageMatrix:
    """Stage game at one history for one attacker type.

    Rows are defender allocations (all goals, in scenario order); columns are
    the type's moves.  At a truncation-boundary history, columns whose successor
    cannot reach the goal are omitted: no admissible strategy uses them.
    """
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    costs: np.ndarray


class RestrictedGame:
    """Prefix-closed truncation of the history tree with continuation values."""

    def __init__(self, scenario: Scenario, table: ContinuationTable):
        self.scenario = scenario
        self.table = table
        self._hist: dict[str, _Hist] = {}
        all_goals = frozenset(scenario.goals)
        root = _Hist(
            nodes=(scenario.start,),
            key=scenario.start,
            depth=0,
            visited_goals=frozenset({scenario.start}) & all_goals,
            edge_walk=True,
        )
        self._hist[root.key] = root
        self.root_key = root.key

    @classmethod
    def initial(cls, scenario: Scenario, table: ContinuationTable, tau: int) -> "RestrictedGame":
        """All move-legal histories of at most tau steps; branches where every
        type has terminated are not grown further."""
        if tau < 1:
            raise ValueError("horizon must be at least 1")
        rg = cls(scenario, table)
        layer = [rg.root_key]
        for _ in range(tau):
            nxt = []
            for key in layer:
                nxt.extend(rg._grow(key, include_stays=True))
            layer = nxt
        return rg

    def _grow(self, key: str, include_stays: bool) -> list[str]:
        """Attach all one-step successors of a history; returns new keys."""
        h = self._hist[key]
        if h.children:
            return []
        if h.visited_goals == frozenset(self.scenario.goals):
            return []  # every type has terminated; subtree is identically zero
        last = h.nodes[-1]
        succs = list(self.scenario.out_neighbors(last))
        if include_stays and last in self.scenario.goals:
            succs.append(last)  # the terminated type stays at its goal
        goals = frozenset(self.scenario.goals)
        new = []
        for s_next in succs:
            child_nodes = h.nodes + (s_next,)
            child = _Hist(
                nodes=child_nodes,
                key=history_key(child_nodes),
                depth=h.depth + 1,
                visited_goals=h.visited_goals | ({s_next} & goals),
                edge_walk=h.edge_walk and s_next != last,
            )
            self._hist[child.key] = child
            h.children.append(child.key)
            new.append(child.key)
        return new

    def expand(self, frontier_keys) -> "RestrictedGame":
        """Grow the set one step below the given boundary histories (in place)."""
        for key in sorted(frontier_keys, key=lambda k: (self._hist[k].depth, k)):
            self._grow(key, include_stays=False)
        return self

    # -- queries ---------------------------------------------------------

    def __contains__(self, key: str) -> bool:
        return key in self._hist

    def __len__(self) -> int:
        return len(self._hist)

    def keys(self) -> list[str]:
        return list(self._hist)

    def nodes_of(self, key: str) -> tuple[str, ...]:
        return self._hist[key].nodes

    def depth(self, key: str) -> int:
        return self._hist[key].depth

    def children(self, key: str) -> list[str]:
        return self._hist[key].children

    def is_leaf(self, key: str) -> bool:
        return not self._hist[key].children

    def is_terminal(self, goal: str, key: str) -> bool:
        return goal in self._hist[key].visited_goals

    def is_edge_walk(self, key: str) -> bool:
        return self._hist[key].edge_walk

    def classify(self, goal: str, key: str) -> str:
        """One of "goal_terminal", "frontier", "interior" for the given type."""
        h = self._hist.get(key)
        if h is None:
            raise KeyError(f"history {key!r} not in the restricted set")
        if goal in h.visited_goals:
            return "goal_terminal"
        return "frontier" if not h.children else "interior"

    def continuation(self, goal: str, node: str) -> float:
        return self.table.values[goal][node]

    def stage_matrix(self, goal: str, key: str) -> StageMatrix:
        """Cost matrix of the stage game at a history for one type.

        Traversal weight is charged on the row matching the type's goal; the
        initial allocation is added at the root; at boundary histories each
        column additionally carries the continuation value of its successor.
        """
        h = self._hist.get(key)
        if h is None:
            raise KeyError(f"history {key!r} not in the restricted set")
        rows = self.scenario.goals
        last = h.nodes[-1]
        cols = action_set(self.scenario, goal, last)
        if goal in h.visited_goals:
            return StageMatrix(rows, cols, np.zeros((len(rows), len(cols))))
        frontier = not h.children
        if frontier:
            cols = tuple(c for c in cols if self.continuation(goal, c) < INF)
        costs = np.zeros((len(rows), len(cols)))
        gi = rows.index(goal)
        for j, s_next in enumerate(cols):
            costs[gi, j] = self.scenario.weight(last, s_next)
            if frontier:
                costs[:, j] += self.continuation(goal, s_next)
        if h.depth == 0:
            costs += self.scenario.allocation(goal)
        return StageMatrix(rows, cols, costs)

    def active_pairs(self):
        """(goal, key) pairs carrying realization-flow variables: histories that
        are not terminal for the type and that the type can physically produce."""
        for key, h in self._hist.items():
            if not h.edge_walk:
                continue
            for goal in self.scenario.goals:
                if goal not in h.visited_goals:
                    yield goal, key

    def flow_columns(self, goal: str, key: str) -> tuple[str, ...]:
        """Moves the type may put probability on at this history."""
        h = self._hist[key]
        last = h.nodes[-1]
        cols = action_set(self.scenario, goal, last)
        if not h.children:
            cols = tuple(c for c in cols if self.continuation(goal, c) < INF)
        return cols
