"""Open-loop Nash and weighted-sum Pareto equilibria of a dissimulation opinion-dynamics game."""
from .model import (GameSpec, KernelSpec, LambdaSpec, ParetoWeights, TimeGrid, ValidationError,
                    eval_a, eval_K, jacobian_K, project_box)
from .dynamics import (eval_cost, eval_costs, eval_intensity_integral, integrate_forward,
                       population_averages)
from .adjoint import (gateaux_derivative, pareto_gateaux_derivative, solve_adjoint_nash,
                      solve_adjoint_pareto)
from .iteration import NonConvergence, Solution, SolveReport, SolverConfig
from .nash_solver import (best_response_check, check_terminal_consensus, phi_map, solve_continuation,
                          solve_fixed_point)
from .pareto_solver import (check_pareto_condition, check_pareto_terminal, pareto_dominance_check, psi_map,
                            solve_pareto, solve_pareto_fixed_point)
from .scenario import ScenarioFile, load_scenario, parse_scenario, run_scenario, sweep

__version__ = "0.1.0"
