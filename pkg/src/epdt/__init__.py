"""Blow-up numerics for u_tt - t^(2l) Lap u + mu u_t/t + nu2 u/t^2 = |u|^p."""

from .constructions import InitialData, TestFunctionContext
from .errors import EPDTError
from .experiments import fit_rate, lifespan_sweep, p_scan
from .exponents import ModelParams, critical_exponent, lifespan_rates
from .solver import SolverConfig, run

__all__ = [
    "EPDTError",
    "InitialData",
    "ModelParams",
    "SolverConfig",
    "TestFunctionContext",
    "critical_exponent",
    "fit_rate",
    "lifespan_rates",
    "lifespan_sweep",
    "p_scan",
    "run",
]
__version__ = "0.1.0"
