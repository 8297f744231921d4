"""Exact simulation of the two-type Moran model with quenched random resampling rates."""
from .disorder import Environment, draw_environment, empirical_D, environment_from_counts
from .engine import (PathRecord, PopulationState, SimEvent, event_rates, init_state,
                     run_to_absorption, simulate_path, step)
from .fw_reference import DiffusionSpec, ks_two_sample, mean_var_ci, moments_fw, simulate_fw
from .rate_law import (RateLaw, diffusion_constant, make_finite_law, make_geometric_law,
                       make_power_law)

__all__ = [
    "DiffusionSpec", "Environment", "PathRecord", "PopulationState", "RateLaw", "SimEvent",
    "diffusion_constant", "draw_environment", "empirical_D", "environment_from_counts",
    "event_rates", "init_state", "ks_two_sample", "make_finite_law", "make_geometric_law",
    "make_power_law", "mean_var_ci", "moments_fw", "run_to_absorption", "simulate_fw",
    "simulate_path", "step",
]
