"""Iterative expansion of the restricted game to an exact equilibrium.

Each round solves the primal sequence-form program, finds the truncation
boundary histories the optimal attacker still reaches with positive
probability, and grows the game one step below all of them.  When no such
history remains, every chosen type terminates inside the restricted set and the
restricted equilibrium, completed by the default defense off the set, is an
equilibrium of the unrestricted game.
"""

import sys
from dataclasses import dataclass, field

from . import analysis, lp
from .defaults import ContinuationTable, build_table
from .environment import Scenario, hop_distances_from
from .restricted_game import RestrictedGame
from .sequence_lp import (AttackerStrategy, DefenderStrategy, build_dual,
                          build_primal, extract_attacker, extract_defender)


class SolveError(RuntimeError):
    pass


class NonconvergenceError(SolveError):
    """The expansion loop hit its round cap before the support terminated."""

    def __init__(self, iterations: int, restricted: RestrictedGame,
                 attacker: AttackerStrategy | None, last_value: float | None):
        super().__init__(
            f"no convergence after {iterations} rounds "
            f"({len(restricted)} histories, last value {last_value})")
        self.iterations = iterations
        self.restricted = restricted
        self.attacker = attacker
        self.last_value = last_value


@dataclass
class SolveOptions:
    tau0: int | None = None          # default: hop count of the nearest goal
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    zero_tol: float = 1e-9
    max_iter: int | None = None      # default: 10 * |nodes|
    delta: float | None = None       # perturbed continuation values when set
    backend: str = "auto"
    verbose: bool = False


@dataclass
class EquilibriumSolution:
    scenario: Scenario
    table: ContinuationTable
    attacker: AttackerStrategy
    defender: DefenderStrategy
    value: float
    dual_value: float
    restricted: RestrictedGame
    iterations: int
    per_type_costs: dict[str, float | None]
    beliefs: dict[str, dict[str, float]]
    support: tuple[str, ...] = field(default=())

    @property
    def duality_gap(self) -> float:
        return abs(self.value - self.dual_value)


def default_tau0(s: Scenario) -> int:
    hops = hop_distances_from(s, s.start)
    return max(1, min(hops[g] for g in s.goals))


def reachable_frontier(rg: RestrictedGame, attacker: AttackerStrategy,
                       zero_tol: float = 1e-9) -> set[str]:
    """Boundary histories carrying positive realization mass for a chosen type."""
    out = set()
    for g in attacker.support(zero_tol):
        for key, z in attacker.plans[g].items():
            if rg.is_leaf(key) and not rg.is_terminal(g, key):
                if sum(z.values()) > zero_tol:
                    out.add(key)
    return out


def solve_game(s: Scenario, options: SolveOptions | None = None) -> EquilibriumSolution:
    opts = options or SolveOptions()
    table = build_table(s, opts.delta)
    tau0 = opts.tau0 if opts.tau0 is not None else default_tau0(s)
    max_iter = opts.max_iter if opts.max_iter is not None else 10 * len(s.nodes)

    rg = RestrictedGame.initial(s, table, tau0)
    attacker = None
    value = None
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        model, idx = build_primal(rg)
        psol = lp.solve(model, opts.feas_tol, opts.opt_tol, opts.backend)
        if psol.status != "optimal":
            raise SolveError(f"primal solve returned {psol.status}")
        value = psol.objective
        attacker = extract_attacker(rg, idx, psol, opts.zero_tol)
        frontier = reachable_frontier(rg, attacker, opts.zero_tol)
        if opts.verbose:
            print(f"[round {iterations}] histories={len(rg)} "
                  f"value={value:.9g} frontier={len(frontier)}", file=sys.stderr)
        if not frontier:
            dmodel, didx = build_dual(rg)
            dsol = lp.solve(dmodel, opts.feas_tol, opts.opt_tol, opts.backend)
            if dsol.status != "optimal":
                raise SolveError(f"dual solve returned {dsol.status}")
            defender = extract_defender(rg, didx, dsol)
            keys = rg.keys()
            support = attacker.support(opts.zero_tol)
            per_type = {}
            for g in s.goals:
                if g in support:
                    per_type[g] = analysis.expected_cost(
                        s, defender, attacker, g, set(keys), opts.zero_tol)
                else:
                    per_type[g] = None
            beliefs = analysis.propagate_beliefs(s, attacker, keys, opts.zero_tol)
            return EquilibriumSolution(
                scenario=s, table=table, attacker=attacker, defender=defender,
                value=value, dual_value=dsol.objective, restricted=rg,
                iterations=iterations, per_type_costs=per_type, beliefs=beliefs,
                support=support,
            )
        before = len(rg)
        rg.expand(frontier)
        if len(rg) <= before:
            raise SolveError("expansion failed to grow the restricted set")
    raise NonconvergenceError(iterations, rg, attacker, value)
