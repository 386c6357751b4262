"""Numerical laboratory for variable-exponent reaction-diffusion gradient
flows with localized large diffusion and their spatially constrained limit."""

from .config import RunConfig, parse_config, serialize_config
from .constants import MarginReport, TheoreticalConstants, compute_constants
from .domain import Domain1D, DiffusionFamily, build_diffusion, build_domain
from .semiflow import EnergyParams, LimitState, Trajectory, evolve, proximal_step
from .varexp import ExponentField, NodalField, QuadratureWeights

__all__ = [
    "RunConfig", "parse_config", "serialize_config",
    "MarginReport", "TheoreticalConstants", "compute_constants",
    "Domain1D", "DiffusionFamily", "build_diffusion", "build_domain",
    "EnergyParams", "LimitState", "Trajectory", "evolve", "proximal_step",
    "ExponentField", "NodalField", "QuadratureWeights",
]

__version__ = "0.1.0"
