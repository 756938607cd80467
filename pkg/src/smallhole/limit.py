"""The eps -> 0 limiting system and the limiting fields and energy coefficients."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from . import potentials as pot
from .model import DensityTriple, ProblemSpec
from .system import COND_MAX, SolveError

log = logging.getLogger(__name__)

XI_BRACKET = 1e3
XI_SAMPLES = 100_000
# |dF/dtau| below this at a root counts as tangential.
DEGENERATE_SLOPE = 1e-8


@dataclass(frozen=True)
class XiRoot:
    value: float
    residual: float
    slope: float

    @property
    def degenerate(self) -> bool:
        """True when dF/dtau vanishes there, so the IFT hypothesis fails."""
        return abs(self.slope) < DEGENERATE_SLOPE


@dataclass(frozen=True)
class LimitSolution:
    mu_o: np.ndarray = field(repr=False)
    mu_i: np.ndarray = field(repr=False)
    xi: float
    root_index: int = 0
    degenerate: bool = False

    def triple(self) -> DensityTriple:
        return DensityTriple(self.mu_o.copy(), self.mu_i.copy(), self.xi)


def _solve_checked(M, rhs, what):
    lu, piv = sla.lu_factor(M)
    rcond, _ = sla.lapack.dgecon(lu, np.linalg.norm(M, 1), norm="1")
    if not rcond > 1 / COND_MAX:
        raise SolveError(f"{what}: ill-conditioned (cond ~ {1 / max(rcond, 1e-300):.3g})")
    return sla.lu_solve((lu, piv), rhs)


def solve_mu_o_limit(spec: ProblemSpec) -> np.ndarray:
    """Mean-zero solution of (-1/2 + W*) mu = g_o - (nu . grad S2) int g_o.

    -1/2 + W* has the equilibrium density in its kernel and mean-zero range,
    so the square system carries a mean-zero row and a multiplier column on
    the constant function. The multiplier comes out at roundoff level.
    """
    r = spec.outer_rule
    n = r.n
    flux = spec.flux_outer()
    dnS = np.einsum("ik,ik->i", r.normals, pot.grad_S2(r.points))
    rhs = spec.g_outer_nodes() - dnS * flux
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = -0.5 * np.eye(n) + pot.wstar_self_matrix(r)
    M[:n, n] = 1.0
    M[n, :n] = r.weights
    sol = _solve_checked(M, np.append(rhs, 0.0), "outer limit equation")
    if abs(sol[n]) > 1e-8 * (1 + np.max(np.abs(rhs))):
        log.warning("outer limit equation multiplier %.3g is not small", sol[n])
    return sol[:n]


def xi_equation_rhs(spec: ProblemSpec) -> float:
    """Value the nonlinearity must take at the limit: (int g_o - r0 int g_i) / |d omega_i|."""
    ri = spec.inner_rule
    length = float(np.sum(ri.weights))
    return (spec.flux_outer() - spec.scaling.r0 * spec.flux_inner()) / length


def xi_roots(spec: ProblemSpec, bracket: float = XI_BRACKET, samples: int = XI_SAMPLES) -> list[XiRoot]:
    """All sign-change roots xi of Ft(l0/(2pi) int g_o + xi, eta0) = rhs in [-bracket, bracket]."""
    sc, F = spec.scaling, spec.nonlinearity
    shift = sc.l0 / (2 * np.pi) * spec.flux_outer()
    eta0 = sc.eta_limit
    rhs = xi_equation_rhs(spec)

    def f(x):
        return F.F(shift + np.asarray(x), eta0) - rhs

    grid = np.linspace(-bracket, bracket, int(samples))
    vals = f(grid)
    found = []
    for k in np.flatnonzero(vals == 0):
        found.append(float(grid[k]))
    s = np.sign(vals)
    for k in np.flatnonzero(s[:-1] * s[1:] < 0):
        found.append(brentq(lambda x: float(f(x)), grid[k], grid[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    roots = []
    for x in sorted(found):
        roots.append(XiRoot(x, float(f(x)), float(F.dF(shift + x, eta0))))
    if not roots:
        warnings.warn(f"no xi root in [-{bracket}, {bracket}]: the limiting system has no solution there")
    return roots


def solve_mu_i_limit(spec: ProblemSpec, xi: float) -> np.ndarray:
    """Solve (1/2 + W*) mu = Ft(l0/(2pi) int g_o + xi, eta0) + r0 g_i on the hole curve."""
    r = spec.inner_rule
    sc = spec.scaling
    c = float(spec.nonlinearity.F(sc.l0 / (2 * np.pi) * spec.flux_outer() + xi, sc.eta_limit))
    rhs = c + sc.r0 * spec.g_inner_nodes()
    M = 0.5 * np.eye(r.n) + pot.wstar_self_matrix(r)
    return _solve_checked(M, rhs, "hole limit equation")


def solve_limit(spec: ProblemSpec, root_index: int = 0, bracket: float = XI_BRACKET,
                samples: int = XI_SAMPLES) -> LimitSolution:
    roots = xi_roots(spec, bracket, samples)
    if not roots:
        raise SolveError("limiting system has no xi root in the search bracket")
    if not -len(roots) <= root_index < len(roots):
        raise IndexError(f"root index {root_index} out of range ({len(roots)} roots)")
    root = roots[root_index]
    if root.degenerate:
        log.warning("xi root %.6g is tangential: IFT hypothesis fails", root.value)
    return LimitSolution(solve_mu_o_limit(spec), solve_mu_i_limit(spec, root.value), root.value,
                         root_index, root.degenerate)


def limit_residual(spec: ProblemSpec, sol: LimitSolution):
    """Residuals of the two limiting equations (original, un-substituted form)."""
    ro, ri = spec.outer_rule, spec.inner_rule
    sc = spec.scaling
    dnS = np.einsum("ik,ik->i", ro.normals, pot.grad_S2(ro.points))
    Zi = ri.integrate(sol.mu_i)
    res_o = -0.5 * sol.mu_o + pot.wstar_self_matrix(ro) @ sol.mu_o + dnS * Zi - spec.g_outer_nodes()
    arg = sc.l0 / (2 * np.pi) * Zi + sol.xi
    res_i = (0.5 * sol.mu_i + pot.wstar_self_matrix(ri) @ sol.mu_i
             - spec.nonlinearity.F(arg, sc.eta_limit) - sc.r0 * spec.g_inner_nodes())
    return res_o, res_i


def limit_fields(spec: ProblemSpec, sol: LimitSolution, targets_M=None, targets_m=None):
    """Limiting macroscopic field (with the S2 * int g_o shift), microscopic field, and Z_m.

    Returns ``(U_M, u_m, Z_m)`` where U_M = v[dOmega_o, mu_o] + S2 int g_o and
    u_m = v[d omega_i, mu_i] + int S2(y) mu_o(y) dy.
    """
    ro, ri = spec.outer_rule, spec.inner_rule
    flux = spec.flux_outer()
    UM = um = None
    if targets_M is not None:
        x = np.atleast_2d(np.asarray(targets_M, dtype=float))
        UM = pot.single_layer_offboundary(ro, sol.mu_o, x) + pot.S2(x) * flux
    if targets_m is not None:
        t = np.atleast_2d(np.asarray(targets_m, dtype=float))
        um = pot.single_layer_offboundary(ri, sol.mu_i, t) + ro.integrate(pot.S2(ro.points) * sol.mu_o)
    return UM, um, flux


@dataclass(frozen=True)
class LimitTraces:
    UM_outer: np.ndarray
    dUM_outer: np.ndarray
    um_inner: np.ndarray
    dum_inner: np.ndarray


def limit_traces(spec: ProblemSpec, sol: LimitSolution) -> LimitTraces:
    """Boundary traces of the limiting fields via jump relations."""
    ro, ri = spec.outer_rule, spec.inner_rule
    flux = spec.flux_outer()
    S2o = pot.S2(ro.points)
    dnS = np.einsum("ik,ik->i", ro.normals, pot.grad_S2(ro.points))
    UM = pot.single_layer_onboundary(ro, sol.mu_o) + S2o * flux
    dUM = pot.neumann_trace(ro, sol.mu_o, "interior") + dnS * flux
    um = pot.single_layer_onboundary(ri, sol.mu_i) + ro.integrate(S2o * sol.mu_o)
    dum = pot.neumann_trace(ri, sol.mu_i, "exterior")
    return LimitTraces(UM, dUM, um, dum)


def limit_energy_coefficients(spec: ProblemSpec, sol: LimitSolution):
    """Limits (E1, E2) of the energy coefficients, plus E2 by its defining integral.

    Returns ``(E1, E2, E2_integral)``; E2 = -(int g_o)^2 / 2pi and
    E2_integral = -(1/2pi) Z_m int dU_M/dnu must agree.
    """
    ro, ri = spec.outer_rule, spec.inner_rule
    tr = limit_traces(spec, sol)
    flux = spec.flux_outer()
    E1 = ro.integrate(tr.UM_outer * tr.dUM_outer) - ri.integrate(tr.um_inner * tr.dum_inner)
    E2 = -flux**2 / (2 * np.pi)
    E2_integral = -flux / (2 * np.pi) * ro.integrate(tr.dUM_outer)
    return E1, E2, E2_integral
