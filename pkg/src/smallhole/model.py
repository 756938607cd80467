"""Problem data: scaling regime, Robin nonlinearity, boundary data, densities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ClosedCurve, PeriodicRule, containment_radius, quadrature


@dataclass(frozen=True)
class ScalingFamily:
    """delta(eps), rho(eps) and eta(eps) = eta0 + eps*eta1.

    delta kinds:
      ``power``     d0 * eps**p * |log eps|**q   (p > -1, so eps*delta*log eps -> 0)
      ``inv_eps_log`` d0 / (eps |log eps|)        (eps*delta*log eps = -d0 exactly)
    rho kinds:
      ``constant``  rho = rho_value              (eps/rho -> 0)
      ``linear``    rho = eps / r0               (eps/rho = r0 exactly)
    """

    delta_kind: str = "power"
    d0: float = 1.0
    p: float = 0.0
    q: float = 0.0
    rho_kind: str = "constant"
    rho_value: float = 1.0
    eta0: tuple[float, ...] = ()
    eta1: tuple[float, ...] = ()

    def __post_init__(self):
        if self.delta_kind not in ("power", "inv_eps_log"):
            raise ValueError(f"unknown delta kind {self.delta_kind!r}")
        if self.rho_kind not in ("constant", "linear"):
            raise ValueError(f"unknown rho kind {self.rho_kind!r}")
        if not self.d0 > 0:
            raise ValueError("d0 must be positive")
        if self.delta_kind == "power" and not self.p > -1:
            raise ValueError("power family needs p > -1 for finite limits")
        if not self.rho_value > 0:
            raise ValueError("rho parameter must be positive")
        if self.eta1 and len(self.eta1) != len(self.eta0):
            raise ValueError("eta0 and eta1 must have the same length")

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingFamily":
        d = dict(d)
        for k in ("eta0", "eta1"):
            if k in d:
                d[k] = tuple(float(v) for v in d[k])
        return cls(**d)

    def to_dict(self) -> dict:
        return {"delta_kind": self.delta_kind, "d0": self.d0, "p": self.p, "q": self.q,
                "rho_kind": self.rho_kind, "rho_value": self.rho_value,
                "eta0": list(self.eta0), "eta1": list(self.eta1)}

    def delta(self, eps: float) -> float:
        if not 0 < eps < 1:
            raise ValueError("delta(eps) is defined for 0 < eps < 1")
        L = abs(math.log(eps))
        if self.delta_kind == "power":
            return self.d0 * eps**self.p * L**self.q
        return self.d0 / (eps * L)

    def rho(self, eps: float) -> float:
        if self.rho_kind == "constant":
            return self.rho_value
        return eps / self.rho_value

    def eta(self, eps: float) -> np.ndarray:
        e0 = np.asarray(self.eta0, dtype=float)
        if not self.eta1:
            return e0
        return e0 + eps * np.asarray(self.eta1, dtype=float)

    def eps_delta(self, eps: float) -> float:
        if self.delta_kind == "inv_eps_log":
            return self.d0 / abs(math.log(eps))
        return eps * self.delta(eps)

    def eps_delta_log_eps(self, eps: float) -> float:
        if self.delta_kind == "inv_eps_log":
            return -self.d0
        return self.eps_delta(eps) * math.log(eps)

    def eps_over_rho(self, eps: float) -> float:
        if self.rho_kind == "linear":
            return self.rho_value
        return eps / self.rho_value

    def gammas(self, eps: float):
        """(eps*delta, eps*delta*log eps, eta, eps/rho) at this eps."""
        return (self.eps_delta(eps), self.eps_delta_log_eps(eps), self.eta(eps), self.eps_over_rho(eps))

    @property
    def l0(self) -> float:
        return -self.d0 if self.delta_kind == "inv_eps_log" else 0.0

    @property
    def r0(self) -> float:
        return self.rho_value if self.rho_kind == "linear" else 0.0

    @property
    def eta_limit(self) -> np.ndarray:
        return np.asarray(self.eta0, dtype=float)

    def limit_gammas(self):
        return (0.0, self.l0, self.eta_limit, self.r0)


@dataclass(frozen=True)
class RobinNonlinearity:
    """Rescaled nonlinearity Ft(tau, eta) with its tau-derivative and tau-inverse.

    ``linear``      Ft = tau
    ``cubic``       Ft = tau + eta[0] tau^3          (eta[0] >= 0 keeps it invertible)
    ``saturating``  Ft = eta[0] tanh(tau / eta[0])

    The raw family is recovered as F_eps(u) = Ft(eps*delta*u, eta) / (eps*delta).
    """

    kind: str = "linear"

    def __post_init__(self):
        if self.kind not in ("linear", "cubic", "saturating"):
            raise ValueError(f"unknown nonlinearity {self.kind!r}")

    @property
    def eta_dim(self) -> int:
        return 0 if self.kind == "linear" else 1

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    def F(self, tau, eta):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "linear":
            return tau.copy()
        e = float(eta[0])
        if self.kind == "cubic":
            return tau + e * tau**3
        return e * np.tanh(tau / e)

    def dF(self, tau, eta):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "linear":
            return np.ones_like(tau)
        e = float(eta[0])
        if self.kind == "cubic":
            return 1 + 3 * e * tau**2
        return 1 / np.cosh(tau / e) ** 2

    def F_inverse(self, value: float, eta) -> float:
        """Solve Ft(tau, eta) = value for tau."""
        v = float(value)
        if self.kind == "linear":
            return v
        e = float(eta[0])
        if self.kind == "saturating":
            if abs(v) >= abs(e):
                raise ValueError("F_eps not invertible at required value")
            return e * math.atanh(v / e)
        if e < 0:
            raise ValueError("cubic nonlinearity with negative coefficient is not invertible")
        if e == 0:
            return v
        # Cardano for tau^3 + tau/e - v/e = 0 (single real root), then Newton polish.
        pp, qq = 1 / e, -v / e
        disc = math.sqrt(qq * qq / 4 + pp**3 / 27)
        tau = np.cbrt(-qq / 2 + disc) + np.cbrt(-qq / 2 - disc)
        for _ in range(3):
            tau -= (tau + e * tau**3 - v) / (1 + 3 * e * tau**2)
        return float(tau)

    def raw(self, u, eps_delta: float, eta):
        return self.F(eps_delta * np.asarray(u, dtype=float), eta) / eps_delta

    def raw_inverse(self, value: float, eps_delta: float, eta) -> float:
        return self.F_inverse(eps_delta * value, eta) / eps_delta


@dataclass(frozen=True)
class FourierData:
    """Boundary datum g(theta) = sum_k cos[k] cos(k theta) + sin[k] sin(k theta)."""

    cos: tuple[float, ...] = (0.0,)
    sin: tuple[float, ...] = ()

    @classmethod
    def constant(cls, c: float) -> "FourierData":
        return cls((float(c),))

    @classmethod
    def from_dict(cls, d) -> "FourierData":
        if isinstance(d, (int, float)):
            return cls.constant(d)
        return cls(tuple(float(v) for v in d.get("cos", (0.0,))),
                   tuple(float(v) for v in d.get("sin", ())))

    def to_dict(self) -> dict:
        return {"cos": list(self.cos), "sin": list(self.sin)}

    @property
    def degree(self) -> int:
        return max(len(self.cos), len(self.sin)) - 1

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        out = np.zeros_like(th)
        for k, c in enumerate(self.cos):
            out += c * np.cos(k * th)
        for k, s in enumerate(self.sin):
            out += s * np.sin(k * th)
        return out


@dataclass(frozen=True)
class ProblemSpec:
    outer: ClosedCurve
    inner: ClosedCurve
    g_outer: FourierData
    g_inner: FourierData
    scaling: ScalingFamily = field(default_factory=ScalingFamily)
    nonlinearity: RobinNonlinearity = field(default_factory=RobinNonlinearity)
    n_outer: int = 256
    n_inner: int = 256

    def __post_init__(self):
        deg = max(self.g_outer.degree, self.g_inner.degree)
        if deg >= min(self.n_outer, self.n_inner) // 2:
            raise ValueError("boundary data degree must stay below N/2")
        if len(self.scaling.eta0) < self.nonlinearity.eta_dim:
            raise ValueError(f"nonlinearity {self.nonlinearity.kind!r} needs "
                             f"{self.nonlinearity.eta_dim} eta parameter(s)")

    @property
    def outer_rule(self) -> PeriodicRule:
        return _rule(self.outer, self.n_outer)

    @property
    def inner_rule(self) -> PeriodicRule:
        return _rule(self.inner, self.n_inner)

    @property
    def eps_max(self) -> float:
        return containment_radius(self.outer, self.inner)

    def check_eps(self, eps: float) -> None:
        if not 0 < eps < self.eps_max:
            raise ValueError(f"eps={eps} outside (0, containment radius {self.eps_max:.6g})")
        if eps >= 1:
            raise ValueError("eps must be below 1")

    def g_outer_nodes(self) -> np.ndarray:
        return self.g_outer(self.outer_rule.theta)

    def g_inner_nodes(self) -> np.ndarray:
        return self.g_inner(self.inner_rule.theta)

    def flux_outer(self) -> float:
        """Integral of g^o over the outer boundary."""
        return self.outer_rule.integrate(self.g_outer_nodes())

    def flux_inner(self) -> float:
        return self.inner_rule.integrate(self.g_inner_nodes())

    def with_nodes(self, n_outer: int, n_inner: int | None = None) -> "ProblemSpec":
        return ProblemSpec(self.outer, self.inner, self.g_outer, self.g_inner, self.scaling,
                           self.nonlinearity, n_outer, n_outer if n_inner is None else n_inner)


_RULES: dict = {}


def _rule(curve: ClosedCurve, n: int) -> PeriodicRule:
    # Rules are immutable; share them across specs with equal geometry.
    key = (curve, n)
    r = _RULES.get(key)
    if r is None:
        r = _RULES.setdefault(key, quadrature(curve, n))
    return r


@dataclass(frozen=True)
class DensityTriple:
    mu_o: np.ndarray
    mu_i: np.ndarray
    xi: float

    @classmethod
    def zeros(cls, spec: ProblemSpec) -> "DensityTriple":
        return cls(np.zeros(spec.n_outer), np.zeros(spec.n_inner), 0.0)

    @classmethod
    def from_vector(cls, z, n_outer: int) -> "DensityTriple":
        z = np.asarray(z, dtype=float)
        return cls(z[:n_outer].copy(), z[n_outer:-1].copy(), float(z[-1]))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.mu_o, self.mu_i, [self.xi]])

