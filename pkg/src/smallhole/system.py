"""Finite-eps integral system for the perforated Neumann-Robin problem.

Unknowns are the triple (mu_o, mu_i, xi): a mean-zero density on the outer
boundary, a density on the (unscaled) hole boundary and a scalar. The
solution is represented as

    u(eps, x) = v[dOmega_o, mu_o](x) + int S2(x - eps s) mu_i(s) ds + xi / (eps delta(eps)).

Discretely the system has N_o + N_i collocation rows plus the mean-zero
row for mu_o, against N_o + N_i + 1 unknowns.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import potentials as pot
from .geometry import inside
from .model import DensityTriple, ProblemSpec

log = logging.getLogger(__name__)

LINEAR_TOL = 1e-10
NEWTON_TOL = 1e-9
COND_MAX = 1e12
MAX_HALVINGS = 8


class SolveError(RuntimeError):
    """A finite-eps solve failed (conditioning, nondegeneracy, convergence)."""


class ConvergenceError(SolveError):
    def __init__(self, msg, best_residual, history):
        super().__init__(msg)
        self.best_residual = best_residual
        self.history = history


@dataclass(frozen=True)
class Operators:
    """Discretized boundary operators of one spec at one eps."""

    eps: float
    W_oo: np.ndarray = field(repr=False)   # W* on the outer curve
    W_oi: np.ndarray = field(repr=False)   # nu_o(x) . grad S2(x - eps s)
    W_io: np.ndarray = field(repr=False)   # eps nu_i(t) . grad S2(eps t - y)
    W_ii: np.ndarray = field(repr=False)   # W* on the hole curve
    S_oo: np.ndarray = field(repr=False)   # on-boundary single layer, outer
    S_oi: np.ndarray = field(repr=False)   # S2(x - eps s), x on outer
    S_io: np.ndarray = field(repr=False)   # S2(eps t - y), t on hole
    S_ii: np.ndarray = field(repr=False)   # on-boundary single layer, hole


def build_operators(spec: ProblemSpec, eps: float) -> Operators:
    ro, ri = spec.outer_rule, spec.inner_rule
    return Operators(
        eps=eps,
        W_oo=pot.wstar_self_matrix(ro),
        W_oi=pot.wstar_cross_matrix(ro, ri, 1.0, eps),
        W_io=eps * pot.wstar_cross_matrix(ri, ro, eps, 1.0),
        W_ii=pot.wstar_self_matrix(ri),
        S_oo=pot.single_layer_self_matrix(ro),
        S_oi=pot.single_layer_matrix(ri, ro.points, scale=eps),
        S_io=pot.single_layer_matrix(ro, eps * ri.points),
        S_ii=pot.single_layer_self_matrix(ri),
    )


def physical_gammas(spec: ProblemSpec, eps: float):
    return spec.scaling.gammas(eps)


class _Blocks:
    """Linear pieces of Lambda: residual = [Lo z - g_o ; Li z - F(A z, g3) - g4 g_i]."""

    def __init__(self, spec: ProblemSpec, ops: Operators, gammas):
        no, ni = spec.n_outer, spec.n_inner
        g1, g2, g3, g4 = gammas
        wi = spec.inner_rule.weights
        self.n = no + ni + 1
        self.no, self.ni = no, ni
        self.Lo = np.hstack([-0.5 * np.eye(no) + ops.W_oo, ops.W_oi, np.zeros((no, 1))])
        self.Li = np.hstack([ops.W_io, 0.5 * np.eye(ni) + ops.W_ii, np.zeros((ni, 1))])
        self.A = np.hstack([g1 * ops.S_io,
                            g1 * ops.S_ii + (g2 / (2 * np.pi)) * wi[None, :],
                            np.ones((ni, 1))])
        self.eta = np.asarray(g3, dtype=float)
        self.rhs_o = spec.g_outer_nodes()
        self.rhs_i = g4 * spec.g_inner_nodes()
        self.mean_row = np.concatenate([spec.outer_rule.weights, np.zeros(ni + 1)])
        self.F = spec.nonlinearity


def _blocks(spec, eps, gammas, ops):
    spec.check_eps(eps)
    ops = build_operators(spec, eps) if ops is None else ops
    gammas = physical_gammas(spec, eps) if gammas is None else gammas
    return _Blocks(spec, ops, gammas)


def assemble_lambda(spec: ProblemSpec, eps: float, gammas=None, triple: DensityTriple = None,
                    ops: Operators | None = None):
    """Residual (Lambda_o, Lambda_i) at the quadrature nodes.

    ``gammas`` defaults to (eps delta, eps delta log eps, eta(eps), eps/rho).
    """
    B = _blocks(spec, eps, gammas, ops)
    z = triple.to_vector()
    arg = B.A @ z
    res_o = B.Lo @ z - B.rhs_o
    res_i = B.Li @ z - B.F.F(arg, B.eta) - B.rhs_i
    return res_o, res_i


def lambda_jacobian(spec: ProblemSpec, eps: float, gammas=None, triple: DensityTriple = None,
                    ops: Operators | None = None) -> np.ndarray:
    """Analytic derivative of (Lambda_o, Lambda_i) w.r.t. (mu_o, mu_i, xi)."""
    B = _blocks(spec, eps, gammas, ops)
    return _jacobian(B, triple.to_vector())


def _jacobian(B: _Blocks, z):
    d = B.F.dF(B.A @ z, B.eta)
    return np.vstack([B.Lo, B.Li - d[:, None] * B.A])


def _full_residual(B: _Blocks, z):
    arg = B.A @ z
    return np.concatenate([B.Lo @ z - B.rhs_o,
                           B.Li @ z - B.F.F(arg, B.eta) - B.rhs_i,
                           [B.mean_row @ z]])


def _factor(M):
    lu = sla.lu_factor(M, check_finite=True)
    anorm = np.linalg.norm(M, 1)
    rcond, _ = sla.lapack.dgecon(lu[0], anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    return lu, cond


def solve_linear(spec: ProblemSpec, eps: float, tol: float = LINEAR_TOL, cond_max: float = COND_MAX,
                 ops: Operators | None = None) -> DensityTriple:
    """Direct LU solve of the bordered system for the linear nonlinearity."""
    if not spec.nonlinearity.is_linear:
        raise ValueError("nonlinear Robin term: use solve_newton")
    B = _blocks(spec, eps, None, ops)
    M = np.vstack([B.Lo, B.Li - B.A, B.mean_row[None, :]])
    rhs = np.concatenate([B.rhs_o, B.rhs_i, [0.0]])
    lu, cond = _factor(M)
    if not cond < cond_max:
        raise SolveError(f"ill-conditioned system (cond ~ {cond:.3g}) at eps={eps}, "
                         f"N=({spec.n_outer}, {spec.n_inner})")
    z = sla.lu_solve(lu, rhs)
    res = np.max(np.abs(_full_residual(B, z)))
    if res > tol:
        raise SolveError(f"linear residual {res:.3g} above tolerance {tol:.3g} at eps={eps}")
    return DensityTriple.from_vector(z, spec.n_outer)


@dataclass
class NewtonReport:
    iterations: int
    residual: float
    history: list


def solve_newton(spec: ProblemSpec, eps: float, initial: DensityTriple, tol: float = NEWTON_TOL,
                 max_iter: int = 30, cond_max: float = COND_MAX, ops: Operators | None = None):
    """Damped Newton iteration on the discretized system, analytic Jacobian.

    Returns ``(triple, NewtonReport)``. Step halving (at most 8 times) kicks
    in only when a full step increases the sup-norm residual.
    """
    B = _blocks(spec, eps, None, ops)
    z = initial.to_vector().astype(float)
    r = _full_residual(B, z)
    res = float(np.max(np.abs(r)))
    history = [res]
    it = 0
    while res > tol:
        if it >= max_iter:
            raise ConvergenceError(f"Newton did not converge in {max_iter} iterations "
                                   f"(best residual {min(history):.3g}) at eps={eps}",
                                   min(history), history)
        J = np.vstack([_jacobian(B, z), B.mean_row[None, :]])
        lu, cond = _factor(J)
        if not cond < cond_max:
            raise SolveError(f"nondegeneracy condition violated near iterate {it} "
                             f"(Jacobian cond ~ {cond:.3g}) at eps={eps}")
        dz = -sla.lu_solve(lu, r)
        step = 1.0
        for _ in range(MAX_HALVINGS + 1):
            z_new = z + step * dz
            r_new = _full_residual(B, z_new)
            res_new = float(np.max(np.abs(r_new)))
            if res_new <= res:
                break
            step *= 0.5
        z, r, res = z_new, r_new, res_new
        it += 1
        history.append(res)
        log.debug("newton eps=%g it=%d step=%g residual=%.3e", eps, it, step, res)
    return DensityTriple.from_vector(z, spec.n_outer), NewtonReport(it, res, history)


def system_residual(spec: ProblemSpec, eps: float, triple: DensityTriple, ops=None) -> float:
    """Sup-norm of the Lambda residual including the mean-zero row."""
    B = _blocks(spec, eps, None, ops)
    return float(np.max(np.abs(_full_residual(B, triple.to_vector()))))


# fields ---------------------------------------------------------------------


def _check_in_domain(spec: ProblemSpec, eps: float, x):
    if not np.all(inside(spec.outer, x)):
        raise ValueError("target outside the outer domain")
    if np.any(inside(spec.inner.scaled(eps), x)):
        raise ValueError("target inside the hole")


def reconstruct_field(spec: ProblemSpec, eps: float, triple: DensityTriple, targets) -> np.ndarray:
    """u(eps, x) at targets separated from both boundaries."""
    spec.check_eps(eps)
    x = np.atleast_2d(np.asarray(targets, dtype=float))
    _check_in_domain(spec, eps, x)
    v = pot.single_layer_offboundary(spec.outer_rule, triple.mu_o, x)
    v += pot.single_layer_offboundary(spec.inner_rule, triple.mu_i, x, scale=eps)
    return v + triple.xi / spec.scaling.eps_delta(eps)


def rescaled_field(spec: ProblemSpec, eps: float, triple: DensityTriple, targets) -> np.ndarray:
    """u(eps, eps t) for t near the hole; the log(eps) part is added analytically."""
    spec.check_eps(eps)
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    _check_in_domain(spec, eps, eps * t)
    return (micro_part(spec, eps, triple, t)
            + math.log(eps) / (2 * np.pi) * spec.inner_rule.integrate(triple.mu_i)
            + triple.xi / spec.scaling.eps_delta(eps))


def micro_part(spec: ProblemSpec, eps: float, triple: DensityTriple, t) -> np.ndarray:
    """U_m(t): the bounded part of u(eps, eps t)."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    return (pot.single_layer_offboundary(spec.outer_rule, triple.mu_o, eps * t)
            + pot.single_layer_offboundary(spec.inner_rule, triple.mu_i, t))


def macro_part(spec: ProblemSpec, eps: float, triple: DensityTriple, x) -> np.ndarray:
    """U_M(x): u(eps, x) without the xi / (eps delta) constant."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return (pot.single_layer_offboundary(spec.outer_rule, triple.mu_o, x)
            + pot.single_layer_offboundary(spec.inner_rule, triple.mu_i, x, scale=eps))


@dataclass(frozen=True)
class BoundaryTraces:
    """Boundary values of u - c_eps and of its normal derivatives.

    c_eps = (log eps / 2pi) Z + xi / (eps delta), Z the total mass of mu_i.
    On the hole the quantities are in the rescaled variable t.
    """

    u_outer: np.ndarray
    dn_outer: np.ndarray
    u_inner: np.ndarray
    dn_inner: np.ndarray
    mass_inner: float


def boundary_traces(spec: ProblemSpec, eps: float, triple: DensityTriple, ops=None) -> BoundaryTraces:
    ops = build_operators(spec, eps) if ops is None else ops
    mo, mi = triple.mu_o, triple.mu_i
    Z = spec.inner_rule.integrate(mi)
    u_o = ops.S_oo @ mo + ops.S_oi @ mi - math.log(eps) / (2 * np.pi) * Z
    dn_o = -0.5 * mo + ops.W_oo @ mo + ops.W_oi @ mi
    u_i = ops.S_io @ mo + ops.S_ii @ mi
    dn_i = ops.W_io @ mo + 0.5 * mi + ops.W_ii @ mi
    return BoundaryTraces(u_o, dn_o, u_i, dn_i, Z)


def energy_parts(spec: ProblemSpec, eps: float, triple: DensityTriple, ops=None):
    """(E1, E2) with energy = E1 + log(eps) E2, from boundary traces only."""
    spec.check_eps(eps)
    tr = boundary_traces(spec, eps, triple, ops)
    ro, ri = spec.outer_rule, spec.inner_rule
    # On the outer boundary u - c = U_M - (log eps / 2pi) Z.
    UM = tr.u_outer + math.log(eps) / (2 * np.pi) * tr.mass_inner
    E1 = ro.integrate(UM * tr.dn_outer) - ri.integrate(tr.u_inner * tr.dn_inner)
    E2 = -tr.mass_inner / (2 * np.pi) * ro.integrate(tr.dn_outer)
    return E1, E2


def energy(spec: ProblemSpec, eps: float, triple: DensityTriple, ops=None) -> float:
    """Dirichlet energy of u(eps, .) over the perforated domain."""
    spec.check_eps(eps)
    tr = boundary_traces(spec, eps, triple, ops)
    return (spec.outer_rule.integrate(tr.u_outer * tr.dn_outer)
            - spec.inner_rule.integrate(tr.u_inner * tr.dn_inner))


def boundary_condition_residuals(spec: ProblemSpec, eps: float, triple: DensityTriple, ops=None):
    """Pointwise residuals of the original boundary conditions.

    Outer: du/dnu - g_o. Hole (multiplied by eps, i.e. in the t variable):
    nu . grad_t u(eps, eps t) - eps delta F_eps(u) - eps g_i / rho, with the raw
    family F_eps evaluated on the full trace of u.
    """
    ops = build_operators(spec, eps) if ops is None else ops
    tr = boundary_traces(spec, eps, triple, ops)
    sc = spec.scaling
    ed = sc.eps_delta(eps)
    u_hole = tr.u_inner + math.log(eps) / (2 * np.pi) * tr.mass_inner + triple.xi / ed
    robin = ed * spec.nonlinearity.raw(u_hole, ed, sc.eta(eps))
    res_o = tr.dn_outer - spec.g_outer_nodes()
    res_i = tr.dn_inner - robin - sc.eps_over_rho(eps) * spec.g_inner_nodes()
    return res_o, res_i
