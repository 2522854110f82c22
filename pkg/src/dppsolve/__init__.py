"""Exact equilibrium solver for multi-goal deceptive path planning games."""

from .analysis import (EvaluationError, IndifferenceReport, VerificationReport,
                       attacker_best_response, check_indifference,
                       defender_best_response, expected_cost, propagate_beliefs,
                       trajectory_costs, verify_equilibrium)
from .defaults import (ContinuationTable, UnreachableGoalError, build_continuation,
                       build_table, continuation_cost, defender_default)
from .documents import (DocumentError, dumps_solution, parse_solution,
                        solution_document)
from .double_oracle import (EquilibriumSolution, NonconvergenceError, SolveError,
                            SolveOptions, default_tau0, reachable_frontier,
                            solve_game)
from .environment import (Scenario, ScenarioError, UnreachableError, action_set,
                          generate_grid, grid_node, load_scenario, save_scenario,
                          scenario_from_dict, scenario_to_dict, shortest_distance)
from .metrics import (MetricsReport, complete_info_overall, complete_info_value,
                      compute_metrics, expected_traversal, risk_of_deception,
                      value_of_information)
from .restricted_game import RestrictedGame, StageMatrix, history_key, is_prefix
from .sequence_lp import (AttackerStrategy, DefenderStrategy, build_dual,
                          build_primal, extract_attacker, extract_defender)

__version__ = "0.1.0"
