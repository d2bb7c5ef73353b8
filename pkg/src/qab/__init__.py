"""Steady-state, power-flow and ZVS analysis of a quad-active-bridge DC-DC converter."""

from .circuit import (
    CircuitMatrices,
    QabConfig,
    assemble_matrices,
    conversion_ratio,
    printed_matrices,
    validate_config,
)
from .config import experiment_config, load_config, table_i_config
from .harmonic import PowerReport, solve_harmonic
from .powerflow import PowerFlowProblem, PowerFlowSolution, power_dispatch, solve_phase_shifts
from .timedomain import periodic_steady_state, simulate_cycles
from .zvs import ZvsReport, zvs_check, zvs_check_timedomain

__all__ = [
    "CircuitMatrices",
    "PowerFlowProblem",
    "PowerFlowSolution",
    "PowerReport",
    "QabConfig",
    "ZvsReport",
    "assemble_matrices",
    "conversion_ratio",
    "experiment_config",
    "load_config",
    "periodic_steady_state",
    "power_dispatch",
    "printed_matrices",
    "simulate_cycles",
    "solve_harmonic",
    "solve_phase_shifts",
    "table_i_config",
    "validate_config",
    "zvs_check",
    "zvs_check_timedomain",
]
