"""Sequence-form primal/dual programs for the restricted game.

The primal decides the attacker's goal mixture and realization flows; its
optimum is the restricted-game value.  The dual decides the defender's
per-history allocation.  Both are built explicitly and solved separately, which
gives an independent strong-duality check on every solve.

A type whose goal coincides with the start node has no moves to make; its cost
is exactly its initial allocation, carried as an objective term on the goal
mixture variable (and as an upper bound on the dual value).
"""

from dataclasses import dataclass

from .environment import action_set
from .lp import LpModel
from .restricted_game import RestrictedGame


@dataclass(frozen=True)
class AttackerStrategy:
    """Goal mixture, behavioral policies, and realization flows.

    policies[goal][key] is the move distribution of that type at a history
    (uniform over the move set where the solve left the history unreached).
    plans[goal][key] holds the joint realization mass per move; its sum is the
    probability that the type is chosen and produces the history.
    """
    goal_choice: dict[str, float]
    policies: dict[str, dict[str, dict[str, float]]]
    plans: dict[str, dict[str, dict[str, float]]] | None = None

    def support(self, zero_tol: float = 1e-9) -> tuple[str, ...]:
        return tuple(g for g, p in self.goal_choice.items() if p > zero_tol)


@dataclass(frozen=True)
class DefenderStrategy:
    """Per-history allocation on the restricted set, default allocation off it."""
    allocation: dict[str, dict[str, float]]
    default_goal: dict[str, str]

    def dist(self, key: str, last_node: str) -> dict[str, float]:
        d = self.allocation.get(key)
        if d is None:
            return {self.default_goal[last_node]: 1.0}
        return d

    def prob(self, key: str, last_node: str, goal: str) -> float:
        return self.dist(key, last_node).get(goal, 0.0)


@dataclass
class PrimalIndex:
    choice: dict[str, int]
    flow: dict[tuple[str, str], tuple[tuple[str, ...], int]]
    hval: dict[str, int]
    degenerate: tuple[str, ...]


@dataclass
class DualIndex:
    value_var: int
    alloc: dict[str, int]
    tval: dict[tuple[str, str], int]


def _degenerate_goals(rg: RestrictedGame) -> tuple[str, ...]:
    # types already at their goal when the game starts
    return tuple(g for g in rg.scenario.goals if rg.is_terminal(g, rg.root_key))


def build_primal(rg: RestrictedGame) -> tuple[LpModel, PrimalIndex]:
    s = rg.scenario
    model = LpModel(minimize=True)
    degenerate = _degenerate_goals(rg)

    choice = {g: model.add_var(f"choice({g})", obj=(s.allocation(g) if g in degenerate else 0.0))
              for g in s.goals}
    flow: dict[tuple[str, str], tuple[tuple[str, ...], int]] = {}
    hval: dict[str, int] = {}
    matrices = {}
    for key in rg.keys():
        hval[key] = model.add_var(f"val({key})", free=True, obj=1.0)
        for g in s.goals:
            if rg.is_terminal(g, key) or not rg.is_edge_walk(key):
                continue
            mat = rg.stage_matrix(g, key)
            matrices[(g, key)] = mat
            base = len(model.names)
            for c in mat.cols:
                model.add_var(f"move({g}|{key}->{c})")
            flow[(g, key)] = (mat.cols, base)

    model.add_constraint([(choice[g], 1.0) for g in s.goals], "=", 1.0)
    for g in s.goals:
        if g in degenerate:
            continue
        cols, base = flow[(g, rg.root_key)]
        coeffs = [(base + j, 1.0) for j in range(len(cols))]
        coeffs.append((choice[g], -1.0))
        model.add_constraint(coeffs, "=", 0.0)

    for key in rg.keys():
        # defender rows: collected cost at this history never exceeds its value slot
        for a_i, a in enumerate(s.goals):
            coeffs = []
            for g in s.goals:
                entry = flow.get((g, key))
                if entry is None:
                    continue
                cols, base = entry
                costs = matrices[(g, key)].costs
                for j in range(len(cols)):
                    v = costs[a_i, j]
                    if v != 0.0:
                        coeffs.append((base + j, float(v)))
            coeffs.append((hval[key], -1.0))
            model.add_constraint(coeffs, "<=", 0.0)

    for (g, key), (cols, base) in flow.items():
        if rg.is_leaf(key):
            continue
        for j, c in enumerate(cols):
            if c == g:
                continue  # child is terminal for this type; mass is absorbed
            child = f"{key}>{c}"
            ccols, cbase = flow[(g, child)]
            coeffs = [(cbase + k, 1.0) for k in range(len(ccols))]
            coeffs.append((base + j, -1.0))
            model.add_constraint(coeffs, "=", 0.0)

    return model, PrimalIndex(choice, flow, hval, degenerate)


def build_dual(rg: RestrictedGame) -> tuple[LpModel, DualIndex]:
    s = rg.scenario
    model = LpModel(minimize=False)
    degenerate = _degenerate_goals(rg)

    value_var = model.add_var("value", free=True, obj=1.0)
    alloc: dict[str, int] = {}
    tval: dict[tuple[str, str], int] = {}
    for key in rg.keys():
        base = len(model.names)
        for g in s.goals:
            model.add_var(f"alloc({key}|{g})")
        alloc[key] = base
        for g in s.goals:
            if rg.is_terminal(g, key) or not rg.is_edge_walk(key):
                continue
            tval[(g, key)] = model.add_var(f"tval({g}|{key})", free=True)

    for key in rg.keys():
        base = alloc[key]
        model.add_constraint([(base + i, 1.0) for i in range(len(s.goals))], "=", 1.0)
    for g in s.goals:
        if g in degenerate:
            model.add_constraint([(value_var, 1.0)], "<=", s.allocation(g))
        else:
            model.add_constraint([(value_var, 1.0), (tval[(g, rg.root_key)], -1.0)], "<=", 0.0)

    for (g, key), var in tval.items():
        mat = rg.stage_matrix(g, key)
        base = alloc[key]
        leaf = rg.is_leaf(key)
        for j, c in enumerate(mat.cols):
            coeffs = [(var, 1.0)]
            for a_i in range(len(s.goals)):
                v = mat.costs[a_i, j]
                if v != 0.0:
                    coeffs.append((base + a_i, -float(v)))
            if not leaf and c != g:
                coeffs.append((tval[(g, f"{key}>{c}")], -1.0))
            model.add_constraint(coeffs, "<=", 0.0)

    return model, DualIndex(value_var, alloc, tval)


def _clamp_dist(raw: dict[str, float]) -> dict[str, float]:
    pos = {k: (v if v > 0.0 else 0.0) for k, v in raw.items()}
    total = sum(pos.values())
    if total > 0.0:
        return {k: v / total for k, v in pos.items()}
    return pos


def extract_attacker(rg: RestrictedGame, idx: PrimalIndex, sol,
                     zero_tol: float = 1e-9) -> AttackerStrategy:
    """Behavioral policies from realization flows; uniform where flow vanished."""
    s = rg.scenario
    choice = _clamp_dist({g: sol.value(v) for g, v in idx.choice.items()})
    policies: dict[str, dict[str, dict[str, float]]] = {g: {} for g in s.goals}
    plans: dict[str, dict[str, dict[str, float]]] = {g: {} for g in s.goals}
    for key in rg.keys():
        last = rg.nodes_of(key)[-1]
        for g in s.goals:
            if rg.is_terminal(g, key):
                continue
            entry = idx.flow.get((g, key))
            z = None
            if entry is not None:
                cols, base = entry
                z = {c: max(sol.value(base + j), 0.0) for j, c in enumerate(cols)}
                plans[g][key] = z
            if z is not None and sum(z.values()) > zero_tol:
                policies[g][key] = _clamp_dist(z)
            else:
                moves = action_set(s, g, last)
                if moves:
                    policies[g][key] = {c: 1.0 / len(moves) for c in moves}
                else:
                    policies[g][key] = {}
    return AttackerStrategy(choice, policies, plans)


def extract_defender(rg: RestrictedGame, idx: DualIndex, sol) -> DefenderStrategy:
    s = rg.scenario
    allocation = {}
    for key, base in idx.alloc.items():
        allocation[key] = _clamp_dist(
            {g: sol.value(base + i) for i, g in enumerate(s.goals)})
    return DefenderStrategy(allocation, dict(rg.table.defender_goal))
