"""Laplace layer potentials in the plane, discretized on periodic rules.

Matrices returned here already include the quadrature weights of the
source rule, so ``M @ mu`` approximates the boundary integral.
"""
from __future__ import annotations

import numpy as np

from .geometry import PeriodicRule

TWO_PI = 2 * np.pi


def S2(x):
    """Fundamental solution (1/2pi) log|x|."""
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[..., 0], x[..., 1])
    if np.any(r == 0):
        raise ValueError("S2 is singular at the origin")
    return np.log(r) / TWO_PI


def grad_S2(x):
    """Gradient x / (2pi |x|^2)."""
    x = np.asarray(x, dtype=float)
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    if np.any(r2 == 0):
        raise ValueError("grad S2 is singular at the origin")
    return x / (TWO_PI * r2[..., None])


def _check_clearance(targets, sources, h, what):
    d = np.min(np.linalg.norm(targets[:, None, :] - sources[None, :, :], axis=-1))
    if d <= h:
        raise ValueError(
            f"{what}: target at distance {d:.3g} from the boundary (node spacing {h:.3g}); "
            "use on-boundary evaluation for boundary points, near-boundary evaluation is not supported"
        )
    return d


def single_layer_matrix(rule: PeriodicRule, targets, scale: float = 1.0) -> np.ndarray:
    """Off-boundary single layer: rows sum_j S2(x - scale*p_j) w_j.

    Targets must sit further than one node spacing (of the scaled curve)
    from the source nodes.
    """
    x = np.atleast_2d(np.asarray(targets, dtype=float))
    src = scale * rule.points
    _check_clearance(x, src, scale * rule.spacing, "single layer")
    diff = x[:, None, :] - src[None, :, :]
    return np.log(np.hypot(diff[..., 0], diff[..., 1])) / TWO_PI * rule.weights


def single_layer_offboundary(rule: PeriodicRule, mu, targets, scale: float = 1.0) -> np.ndarray:
    return single_layer_matrix(rule, targets, scale) @ np.asarray(mu, dtype=float)


def kress_log_weights(n: int) -> np.ndarray:
    """Circulant row R_j with sum_j R_j f(t_j) ~ int log(4 sin^2((t_0 - t)/2)) f(t) dt."""
    if n % 2:
        raise ValueError("log-singular quadrature needs an even node count")
    half = n // 2
    t = 2 * np.pi * np.arange(n) / n
    m = np.arange(1, half)
    R = -(4 * np.pi / n) * (np.cos(np.outer(t, m)) @ (1.0 / m))
    R -= (4 * np.pi / n**2) * np.cos(half * t)
    return R


def single_layer_self_matrix(rule: PeriodicRule) -> np.ndarray:
    """On-boundary single layer with spectral log-singular quadrature.

    The kernel is split as (1/4pi) log(4 sin^2((t-s)/2)) plus a smooth
    remainder whose diagonal limit is (1/2pi) log|p'(t)|.
    """
    n = rule.n
    R = kress_log_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    t = rule.theta
    dt = t[:, None] - t[None, :]
    diff = rule.points[:, None, :] - rule.points[None, :, :]
    r2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    s4 = 4 * np.sin(dt / 2) ** 2
    np.fill_diagonal(r2, 1.0)
    np.fill_diagonal(s4, 1.0)
    smooth = np.log(r2 / s4) / (4 * np.pi)
    np.fill_diagonal(smooth, np.log(rule.speeds) / TWO_PI)
    return R[idx] * rule.speeds[None, :] / (4 * np.pi) + smooth * rule.weights[None, :]


def single_layer_onboundary(rule: PeriodicRule, mu) -> np.ndarray:
    return single_layer_self_matrix(rule) @ np.asarray(mu, dtype=float)


def wstar_self_matrix(rule: PeriodicRule, diagonal_sign: float = 1.0) -> np.ndarray:
    """Adjoint double layer on its own curve.

    Off the diagonal nu(x_i).(x_i - y_j) / (2pi |x_i - y_j|^2) w_j; on it the
    smooth limit kappa_i / (4pi) w_i. ``diagonal_sign`` exists only as a
    negative-control hook for the verification suite.
    """
    x = rule.points
    diff = x[:, None, :] - x[None, :, :]
    r2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    np.fill_diagonal(r2, 1.0)
    num = np.einsum("ik,ijk->ij", rule.normals, diff)
    K = num / (TWO_PI * r2)
    np.fill_diagonal(K, diagonal_sign * rule.curvatures / (4 * np.pi))
    return K * rule.weights[None, :]


def wstar_cross_matrix(target_rule: PeriodicRule, source_rule: PeriodicRule,
                       target_scale: float = 1.0, source_scale: float = 1.0) -> np.ndarray:
    """nu_T(x_i) . grad S2(tscale*x_i - sscale*y_j) w_j between two distinct curves.

    Source weights are the unscaled ones of ``source_rule``; any Jacobian
    factor is the caller's business.
    """
    x = target_scale * target_rule.points
    y = source_scale * source_rule.points
    h = max(target_scale * target_rule.spacing, source_scale * source_rule.spacing)
    d = np.min(np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1))
    if d < 2 * h:
        raise ValueError(f"curves too close ({d:.3g} < 2 node spacings); increase N or reduce eps")
    diff = x[:, None, :] - y[None, :, :]
    r2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    num = np.einsum("ik,ijk->ij", target_rule.normals, diff)
    return num / (TWO_PI * r2) * source_rule.weights[None, :]


def wstar_apply(target_rule: PeriodicRule, source_rule: PeriodicRule, mu,
                target_scale: float = 1.0, source_scale: float = 1.0) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if target_rule is source_rule and target_scale == source_scale:
        return wstar_self_matrix(target_rule) @ mu
    return wstar_cross_matrix(target_rule, source_rule, target_scale, source_scale) @ mu


def gauss_point_flux(rule: PeriodicRule) -> float:
    """Flux of grad S2 through the curve: 1 if it encloses the origin, else 0."""
    g = grad_S2(rule.points)
    return float(np.sum(np.einsum("ik,ik->i", rule.normals, g) * rule.weights))


def neumann_trace(rule: PeriodicRule, mu, side: str, wstar=None) -> np.ndarray:
    """Normal derivative of the single layer from one side of the curve.

    ``interior`` gives -mu/2 + W*mu, ``exterior`` gives +mu/2 + W*mu.
    """
    mu = np.asarray(mu, dtype=float)
    W = wstar_self_matrix(rule) if wstar is None else wstar
    jump = {"interior": -0.5, "exterior": 0.5}
    if side not in jump:
        raise ValueError("side must be 'interior' or 'exterior'")
    return jump[side] * mu + W @ mu
