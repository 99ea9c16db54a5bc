"""Energy-optimal partial offloading for two ground users served by a hovering UAV edge server."""

from .bcd.solver import OptResult, bcd_solve, default_start
from .comparison import ab_fields, noma_fdma_finite_delta, scheme_gaps, symmetric_delta
from .config import (Decision, EvalMode, Regime, Scheme, SystemConfig, UeProfile, default_decision,
                     default_ues)
from .energy import EnergyBreakdown, check_constraints, total_energy
from .errors import (DomainError, InfeasibleError, ScenarioError, SolverError, UavMecError,
                     ValidationError)
from .model import channel_gains, computation_energies, cpu_frequencies, snr_threshold
from .oracle import GridSpec, grid_search, subproblem_oracle
from .power import min_powers

__version__ = "0.1.0"

__all__ = [
    "Decision", "DomainError", "EnergyBreakdown", "EvalMode", "GridSpec", "InfeasibleError", "OptResult",
    "Regime", "ScenarioError", "Scheme", "SolverError", "SystemConfig", "UavMecError", "UeProfile",
    "ValidationError", "ab_fields", "bcd_solve", "channel_gains", "check_constraints", "computation_energies",
    "cpu_frequencies", "default_decision", "default_start", "default_ues", "grid_search", "min_powers",
    "noma_fdma_finite_delta", "scheme_gaps", "snr_threshold", "subproblem_oracle", "symmetric_delta",
    "total_energy",
]
