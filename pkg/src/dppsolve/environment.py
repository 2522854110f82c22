"""Graph scenarios: validation, generation, shortest paths, and move sets.

A scenario is a directed weighted graph together with an ordered list of
candidate goals, a per-goal initial defense allocation, and a start node.
Goal order matters: it defines the index used to break ties deterministically
throughout the solver.
"""

import heapq
import json
from dataclasses import dataclass, field


class ScenarioError(ValueError):
    """Raised when a scenario document violates the schema or an invariant."""


class UnreachableError(ValueError):
    """Raised when a shortest-path query has no directed path."""


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]
    goals: tuple[str, ...]
    initial_allocation: dict[str, float]
    start: str
    undirected: bool = False
    # out-neighbors in node declaration order, built on construction
    _out: dict[str, tuple[str, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        order = {v: i for i, v in enumerate(self.nodes)}
        out = {v: [] for v in self.nodes}
        for (u, v) in self.edges:
            out[u].append(v)
        object.__setattr__(
            self, "_out", {v: tuple(sorted(out[v], key=order.__getitem__)) for v in self.nodes}
        )

    def out_neighbors(self, node: str) -> tuple[str, ...]:
        return self._out[node]

    def weight(self, u: str, v: str) -> float:
        return self.edges[(u, v)]

    def goal_index(self, goal: str) -> int:
        return self.goals.index(goal)

    def allocation(self, goal: str) -> float:
        return self.initial_allocation.get(goal, 0.0)

    def replace_start(self, start: str) -> "Scenario":
        if start not in self.nodes:
            raise ScenarioError(f"unknown start node {start!r}")
        s = Scenario(self.nodes, dict(self.edges), self.goals,
                     dict(self.initial_allocation), start, self.undirected)
        _check_goals_reachable(s)
        return s


def action_set(s: Scenario, goal: str, at: str) -> tuple[str, ...]:
    """Moves available to an attacker of the given type at a node.

    At the type's own goal the only move is to stay; the game has ended there.
    """
    if at == goal:
        return (goal,)
    return s.out_neighbors(at)


def _parse_edges(raw_edges, nodes: set[str], undirected: bool) -> dict[tuple[str, str], float]:
    edges: dict[tuple[str, str], float] = {}
    for e in raw_edges:
        try:
            u, v, w = e["from"], e["to"], float(e["w"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed edge entry {e!r}") from exc
        for x in (u, v):
            if x not in nodes:
                raise ScenarioError(f"edge references unknown node {x!r}")
        if u == v:
            raise ScenarioError(f"self-loop edge at {u!r} is not allowed")
        if not (w > 0.0):
            raise ScenarioError(f"nonpositive weight {w} on edge {u!r}->{v!r}")
        pairs = [(u, v), (v, u)] if undirected else [(u, v)]
        for p in pairs:
            if p in edges:
                raise ScenarioError(f"duplicate edge {p[0]!r}->{p[1]!r}")
            edges[p] = w
    return edges


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    try:
        nodes = list(doc["nodes"])
        raw_edges = doc["edges"]
        goals = list(doc["goals"])
        start = doc["start"]
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"missing or malformed required field: {exc}") from exc
    if not nodes:
        raise ScenarioError("empty node list")
    if len(set(nodes)) != len(nodes):
        raise ScenarioError("duplicate node identifiers")
    if not goals:
        raise ScenarioError("empty goal set")
    if len(set(goals)) != len(goals):
        raise ScenarioError("duplicate goals")
    node_set = set(nodes)
    for g in goals:
        if g not in node_set:
            raise ScenarioError(f"goal {g!r} is not a node")
    if start not in node_set:
        raise ScenarioError(f"start {start!r} is not a node")
    undirected = bool(doc.get("undirected", False))
    edges = _parse_edges(raw_edges, node_set, undirected)
    alloc_doc = doc.get("initial_allocation", {}) or {}
    alloc: dict[str, float] = {}
    for g, r in alloc_doc.items():
        if g not in goals:
            raise ScenarioError(f"initial_allocation for non-goal {g!r}")
        r = float(r)
        if r < 0.0:
            raise ScenarioError(f"negative initial allocation for {g!r}")
        alloc[g] = r
    s = Scenario(tuple(nodes), edges, tuple(goals), alloc, start, undirected)
    _check_goals_reachable(s)
    return s


def load_scenario(text: str) -> Scenario:
    """Parse and validate a scenario JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def scenario_to_dict(s: Scenario) -> dict:
    # always serialized in directed form: round-trips regardless of origin
    return {
        "nodes": list(s.nodes),
        "edges": [{"from": u, "to": v, "w": w} for (u, v), w in s.edges.items()],
        "undirected": False,
        "goals": list(s.goals),
        "initial_allocation": {g: s.allocation(g) for g in s.goals},
        "start": s.start,
    }


def save_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def grid_node(row: int, col: int) -> str:
    return f"r{row}c{col}"


def generate_grid(rows: int, cols: int, goals: list[tuple[int, int]],
                  start: tuple[int, int], weight: float = 1.0) -> Scenario:
    """4-connected grid with bidirectional edges of uniform weight."""
    if rows < 1 or cols < 1:
        raise ScenarioError("grid dimensions must be positive")
    if not (weight > 0.0):
        raise ScenarioError(f"nonpositive weight {weight}")
    if not goals:
        raise ScenarioError("empty goal set")

    def check(cell):
        r, c = cell
        if not (0 <= r < rows and 0 <= c < cols):
            raise ScenarioError(f"cell {cell} out of range for {rows}x{cols} grid")
        return cell

    for cell in goals:
        check(cell)
    check(start)
    if len(set(goals)) != len(goals):
        raise ScenarioError("duplicate goal cells")

    nodes = [grid_node(r, c) for r in range(rows) for c in range(cols)]
    edges: dict[tuple[str, str], float] = {}
    for r in range(rows):
        for c in range(cols):
            if r + 1 < rows:
                edges[(grid_node(r, c), grid_node(r + 1, c))] = weight
                edges[(grid_node(r + 1, c), grid_node(r, c))] = weight
            if c + 1 < cols:
                edges[(grid_node(r, c), grid_node(r, c + 1))] = weight
                edges[(grid_node(r, c + 1), grid_node(r, c))] = weight
    return Scenario(
        tuple(nodes), edges,
        tuple(grid_node(r, c) for r, c in goals),
        {}, grid_node(*start),
    )


def distances_from(s: Scenario, src: str) -> dict[str, float]:
    """Weighted shortest-path distances from src to every reachable node."""
    dist = {src: 0.0}
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in s.out_neighbors(u):
            nd = d + s.edges[(u, v)]
            if nd < dist.get(v, float("inf")):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def distances_to(s: Scenario, dst: str) -> dict[str, float]:
    """Weighted shortest-path distances from every node to dst (reverse Dijkstra)."""
    rev: dict[str, list[tuple[str, float]]] = {v: [] for v in s.nodes}
    for (u, v), w in s.edges.items():
        rev[v].append((u, w))
    dist = {dst: 0.0}
    heap = [(0.0, dst)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in rev[u]:
            nd = d + w
            if nd < dist.get(v, float("inf")):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def shortest_distance(s: Scenario, src: str, dst: str) -> float:
    d = distances_from(s, src).get(dst)
    if d is None:
        raise UnreachableError(f"no directed path {src!r} -> {dst!r}")
    return d


def hop_distances_from(s: Scenario, src: str) -> dict[str, int]:
    """Unweighted hop counts from src (BFS)."""
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in s.out_neighbors(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def _check_goals_reachable(s: Scenario) -> None:
    reach = distances_from(s, s.start)
    for g in s.goals:
        if g not in reach:
            raise ScenarioError(f"goal {g!r} unreachable from start {s.start!r}")
