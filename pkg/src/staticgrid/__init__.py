"""Static power-system analysis toolkit."""

from .case_io import parse_case, read_case, serialize_case, write_case
from .case_model import PowerCase, classify_branch, validate_case
from .cpf import CpfOptions, GrowthDirections, critical_bus, loadability_margin, trace_pv_curve
from .network import build_admittance
from .opf import OpfOptions, pareto_sweep, solve_market_vsc_opf
from .powerflow import SolverOptions, solve_power_flow
from .scenario import ScenarioSpec, apply_scenario
from .sensitivity import rank_wind_farms

__version__ = "0.1.0"

__all__ = [
    "CpfOptions", "GrowthDirections", "OpfOptions", "PowerCase", "ScenarioSpec", "SolverOptions",
    "apply_scenario", "build_admittance", "classify_branch", "critical_bus", "loadability_margin",
    "pareto_sweep", "parse_case", "rank_wind_farms", "read_case", "serialize_case",
    "solve_market_vsc_opf", "solve_power_flow", "trace_pv_curve", "validate_case", "write_case",
]
