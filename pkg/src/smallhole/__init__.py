"""Laplace problem with a mixed Neumann-Robin condition in a domain with a small hole.

Boundary integral (Nystrom) solver at finite eps, the eps -> 0 limiting
system, closed-form annulus solutions and an experiment harness.
"""
from .config import ExperimentConfig, load_config
from .geometry import ClosedCurve, PeriodicRule, quadrature
from .limit import LimitSolution, solve_limit, xi_roots
from .model import DensityTriple, FourierData, ProblemSpec, RobinNonlinearity, ScalingFamily
from .system import SolveError, energy, reconstruct_field, rescaled_field, solve_linear, solve_newton

__all__ = [
    "ClosedCurve", "DensityTriple", "ExperimentConfig", "FourierData", "LimitSolution", "PeriodicRule",
    "ProblemSpec", "RobinNonlinearity", "ScalingFamily", "SolveError", "energy", "load_config",
    "quadrature", "reconstruct_field", "rescaled_field", "solve_limit", "solve_linear", "solve_newton",
    "xi_roots",
]
