"""Simulation and verification toolkit for adaptive consensus protocols on
directed graphs under bounded matched disturbances.

The pieces, bottom up: dense numerics (Lyapunov/Riccati solvers), graph
Laplacians and their spectral constants, the Riccati gain design plus the
four protocol variants (leader/leaderless x robust/non-robust adaptation),
a fixed-step RK4 network simulator, and the closed-form residual-set bounds
the robust variants can be checked against.
"""

from .numerics import (AreSolution, ConvergenceError, is_hurwitz, lu_solve,
                       lyapunov_solve, sigma_max, solve_are, sym_eig)
from .graph import (DirectedGraph, GraphStructureError, LeaderConstants,
                    LeaderPartition, StrongConstants, contains_spanning_tree,
                    is_strongly_connected, laplacian, leader_constants,
                    partition_leader, strong_constants)
from .protocol import (GainDesign, ProtocolConfig, Variant, control,
                       design_gains, gain_rate, relative_state, rho)
from .sim import (AgentModel, Disturbance, Scenario, SimulationDivergence,
                  Trajectory, draw_initial_gains, draw_initial_states,
                  eval_disturbance, nonrobust_twin, read_trajectory_csv,
                  simulate, system_derivative, tail_sup_norm,
                  write_trajectory_csv)
from .bounds import (ContainmentReport, LeaderBound, LeaderlessBound,
                     check_containment, leader_bound, leaderless_bound,
                     omega_tilde_bound)
from .scenario_io import (OutputSpec, ScenarioFile, ScenarioFormatError,
                          load_scenario_file, parse_scenario,
                          parse_scenario_text, write_scenario)
from .svgplot import line_plot
from .cli import RunReport, main

__version__ = "0.1.0"

__all__ = [
    "AgentModel", "AreSolution", "ContainmentReport", "ConvergenceError",
    "DirectedGraph", "Disturbance", "GainDesign", "GraphStructureError",
    "LeaderBound", "LeaderConstants", "LeaderPartition", "LeaderlessBound",
    "OutputSpec", "ProtocolConfig", "RunReport", "Scenario", "ScenarioFile",
    "ScenarioFormatError", "SimulationDivergence", "StrongConstants",
    "Trajectory", "Variant", "check_containment", "contains_spanning_tree",
    "control", "design_gains", "draw_initial_gains", "draw_initial_states",
    "eval_disturbance", "gain_rate", "is_hurwitz", "is_strongly_connected",
    "laplacian", "leader_bound", "leader_constants", "leaderless_bound",
    "line_plot", "load_scenario_file", "lu_solve", "lyapunov_solve", "main",
    "nonrobust_twin", "omega_tilde_bound", "parse_scenario",
    "parse_scenario_text", "partition_leader", "read_trajectory_csv",
    "relative_state", "rho", "sigma_max", "simulate", "solve_are",
    "strong_constants", "sym_eig", "system_derivative", "tail_sup_norm",
    "write_scenario", "write_trajectory_csv",
]
