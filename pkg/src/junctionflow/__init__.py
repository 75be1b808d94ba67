"""Simulation and TV-penalized inflow control for LWR traffic at a junction.

A first-order Godunov solver per arc, demand/supply coupling at the
node through a column-stochastic routing matrix, a flux-maximization
baseline node solver, penalized cost functionals over realized flux
traces, and a deterministic coordinate-ascent control search.
"""

from .arc import (ArcConfig, ArcHistory, ArcState, BoundaryFluxError,
                  CFLViolation, InvariantViolation, Orientation, cfl_dt, mass,
                  run_single_arc, sample_initial, step, trace_at)
from .costs import (CostBreakdown, CostSpec, cost_breakdown, delta_sweep,
                    integral_cost, penalized_cost, tv)
from .flux import DomainError, FluxModel
from .junction import (JunctionNetwork, clip_control, gamma_bounds,
                       junction_riemann_solver)
from .optimize import (SearchConfig, SearchResult, baseline_trace_control,
                       exhaustive_oracle, local_search)
from .oracles import (boundary_layer_cell_averages, boundary_layer_solution,
                      boundary_layer_trace, exact_riemann, lp_vertex_oracle)
from .paths import (PiecewiseConstantPath, distribution_matrix_path,
                    sampled_tv)
from .scenarios import (ArcSpec, FluxSpec, InitialSpec, Scenario,
                        builtin_scenario, load_scenario, tiny_scenario)
from .simulate import SimulationResult, run_scenario, simulate

__version__ = "0.1.0"

__all__ = [
    "ArcConfig", "ArcHistory", "ArcSpec", "ArcState", "BoundaryFluxError",
    "CFLViolation", "CostBreakdown", "CostSpec", "DomainError", "FluxModel",
    "FluxSpec", "InitialSpec", "InvariantViolation", "JunctionNetwork",
    "Orientation", "PiecewiseConstantPath", "Scenario", "SearchConfig",
    "SearchResult", "SimulationResult", "baseline_trace_control",
    "boundary_layer_cell_averages", "boundary_layer_solution",
    "boundary_layer_trace", "builtin_scenario", "cfl_dt", "clip_control",
    "cost_breakdown", "delta_sweep", "distribution_matrix_path",
    "exact_riemann", "exhaustive_oracle", "gamma_bounds", "integral_cost",
    "junction_riemann_solver", "load_scenario", "local_search", "mass",
    "lp_vertex_oracle", "penalized_cost", "run_scenario", "run_single_arc",
    "sample_initial", "sampled_tv", "simulate", "step", "tiny_scenario",
    "trace_at", "tv",
]
