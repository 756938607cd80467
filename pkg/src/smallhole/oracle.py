"""Closed-form solutions on the annulus B(0,1) minus closure of B(0,eps).

With constant data g_o = a, g_i = b the solution is radial,
u = a log|x| + B_eps, and everything below follows from that ansatz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import ClosedCurve
from .model import DensityTriple, FourierData, ProblemSpec, RobinNonlinearity, ScalingFamily


@dataclass(frozen=True)
class ToyConfig:
    """Annulus data. ``inverse(eps, v)`` solves F_eps(u) = v for the nonlinear toy."""

    a: float
    b: float
    scaling: ScalingFamily = field(default_factory=ScalingFamily)
    inverse: Optional[Callable[[float, float], float]] = None

    @classmethod
    def from_nonlinearity(cls, a, b, scaling: ScalingFamily, nl: RobinNonlinearity) -> "ToyConfig":
        def inv(eps, v):
            return nl.raw_inverse(v, scaling.eps_delta(eps), scaling.eta(eps))
        return cls(a, b, scaling, inv)

    def problem(self, n: int = 256, nonlinearity: RobinNonlinearity | None = None) -> ProblemSpec:
        disk = ClosedCurve.circle(1.0)
        return ProblemSpec(disk, disk, FourierData.constant(self.a), FourierData.constant(self.b),
                           self.scaling, nonlinearity or RobinNonlinearity(), n, n)


def _check(eps, x):
    if not 0 < eps < 1:
        raise ValueError("annulus oracle needs 0 < eps < 1")
    r = np.hypot(*np.moveaxis(np.atleast_2d(np.asarray(x, dtype=float)), -1, 0))
    # A little slack so points placed exactly on a boundary are accepted.
    if np.any(r < eps * (1 - 1e-12)) or np.any(r > 1 + 1e-12):
        raise ValueError("point outside the closed annulus")
    return r


def toy_solution(cfg: ToyConfig, eps: float, x) -> np.ndarray:
    r = _check(eps, x)
    sc = cfg.scaling
    B = (cfg.a / eps - cfg.b / sc.rho(eps)) / sc.delta(eps) - cfg.a * math.log(eps)
    return cfg.a * np.log(r) + B


def toy_constant_nonlinear(cfg: ToyConfig, eps: float) -> float:
    """B_eps = F_eps^{-1}((a rho - eps b) / (eps rho delta)) - a log eps."""
    if cfg.inverse is None:
        raise ValueError("nonlinear toy needs the inverse of F_eps")
    sc = cfg.scaling
    rho, delta = sc.rho(eps), sc.delta(eps)
    v = (cfg.a * rho - eps * cfg.b) / (eps * rho * delta)
    try:
        return cfg.inverse(eps, v) - cfg.a * math.log(eps)
    except (ValueError, ArithmeticError) as exc:
        raise ValueError("F_eps not invertible at required value") from exc


def toy_solution_nonlinear(cfg: ToyConfig, eps: float, x) -> np.ndarray:
    r = _check(eps, x)
    return cfg.a * np.log(r) + toy_constant_nonlinear(cfg, eps)


def toy_energy(cfg: ToyConfig, eps: float) -> float:
    if not 0 < eps < 1:
        raise ValueError("annulus oracle needs 0 < eps < 1")
    return 2 * np.pi * cfg.a**2 * -math.log(eps)


def toy_xi_linear(a: float, b: float, l0: float, r0: float) -> float:
    return a - a * l0 - b * r0


def annulus_triple(cfg: ToyConfig, eps: float, n_outer: int, n_inner: int,
                   nonlinear: bool = False) -> DensityTriple:
    """Exact densities representing the annulus solution.

    A constant density c on the unit circle has potential 0 inside and
    c log|x| outside, so mu_o = 0 (it must be mean-zero anyway) and mu_i = a
    reproduce a log|x|. The remaining constant B_eps equals xi / (eps delta).
    """
    sc = cfg.scaling
    if nonlinear:
        B = toy_constant_nonlinear(cfg, eps)
    else:
        B = (cfg.a / eps - cfg.b / sc.rho(eps)) / sc.delta(eps) - cfg.a * math.log(eps)
    return DensityTriple(np.zeros(n_outer), np.full(n_inner, float(cfg.a)), sc.eps_delta(eps) * B)
