"""Analytic closed curves and periodic trapezoidal rules on them.

All curves are parametrized over [0, 2*pi), counterclockwise, with the
outward normal obtained by rotating the tangent clockwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

KINDS = ("circle", "ellipse", "star", "fourier")

# Sample count for orientation, positivity and containment checks.
_DENSE = 1024


@dataclass(frozen=True)
class ClosedCurve:
    """A smooth closed curve from one of the built-in analytic families.

    Use the constructors :meth:`circle`, :meth:`ellipse`, :meth:`star` and
    :meth:`fourier`; parameters are validated once, at construction.

    ``star`` is the radial curve r(theta) = radius * (1 + amplitude*cos(lobes*theta))
    and ``fourier`` the radial curve r(theta) = sum_k cos[k] cos(k theta) + sin[k] sin(k theta).
    """

    kind: str
    radius: float = 1.0
    a: float = 1.0
    b: float = 1.0
    amplitude: float = 0.0
    lobes: int = 0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "circle" and not self.radius > 0:
            raise ValueError("circle radius must be positive")
        if self.kind == "ellipse" and not (self.a > 0 and self.b > 0):
            raise ValueError("ellipse semi-axes must be positive")
        if self.kind == "star":
            if not self.radius > 0:
                raise ValueError("star base radius must be positive")
            if int(self.lobes) != self.lobes or self.lobes < 1:
                raise ValueError("star lobe count must be a positive integer")
            # |amplitude| < 1 keeps the radial function positive, so the curve is simple.
            if not 0 <= self.amplitude < 1:
                raise ValueError("star amplitude must lie in [0, 1)")
        if self.kind == "fourier":
            if len(self.cos) == 0:
                raise ValueError("fourier curve needs at least the constant coefficient")
            if len(self.sin) > len(self.cos):
                raise ValueError("fourier curve: more sine than cosine coefficients")
            th = np.linspace(0, 2 * np.pi, 4 * _DENSE, endpoint=False)
            if np.min(self._radial(th)[0]) <= 0:
                raise ValueError("fourier radial function must be positive")
        th = np.linspace(0, 2 * np.pi, _DENSE, endpoint=False)
        p, dp, _ = self.derivatives(th)
        if np.min(np.hypot(dp[:, 0], dp[:, 1])) <= 0:
            raise ValueError("curve has a stationary point")
        area = 0.5 * np.mean(p[:, 0] * dp[:, 1] - p[:, 1] * dp[:, 0]) * 2 * np.pi
        if area <= 0:
            raise ValueError("curve must be counterclockwise")

    # constructors -----------------------------------------------------------

    @classmethod
    def circle(cls, radius: float = 1.0, center=(0.0, 0.0)) -> "ClosedCurve":
        return cls("circle", radius=float(radius), center=_pt(center))

    @classmethod
    def ellipse(cls, a: float, b: float, center=(0.0, 0.0)) -> "ClosedCurve":
        return cls("ellipse", a=float(a), b=float(b), center=_pt(center))

    @classmethod
    def star(cls, radius: float, amplitude: float, lobes: int, center=(0.0, 0.0)) -> "ClosedCurve":
        return cls("star", radius=float(radius), amplitude=float(amplitude),
                   lobes=int(lobes), center=_pt(center))

    @classmethod
    def fourier(cls, cos: Sequence[float], sin: Sequence[float] = (), center=(0.0, 0.0)) -> "ClosedCurve":
        return cls("fourier", cos=tuple(float(c) for c in cos),
                   sin=tuple(float(s) for s in sin), center=_pt(center))

    @classmethod
    def from_dict(cls, d: dict) -> "ClosedCurve":
        d = dict(d)
        kind = d.pop("kind")
        center = d.pop("center", (0.0, 0.0))
        if kind == "circle":
            return cls.circle(d.pop("radius", 1.0), center=center)
        if kind == "ellipse":
            return cls.ellipse(d.pop("a"), d.pop("b"), center=center)
        if kind == "star":
            return cls.star(d.pop("radius", 1.0), d.pop("amplitude"), d.pop("lobes"), center=center)
        if kind == "fourier":
            return cls.fourier(d.pop("cos"), d.pop("sin", ()), center=center)
        raise ValueError(f"unknown curve kind {kind!r}")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "circle":
            out["radius"] = self.radius
        elif self.kind == "ellipse":
            out.update(a=self.a, b=self.b)
        elif self.kind == "star":
            out.update(radius=self.radius, amplitude=self.amplitude, lobes=self.lobes)
        else:
            out.update(cos=list(self.cos), sin=list(self.sin))
        if self.center != (0.0, 0.0):
            out["center"] = list(self.center)
        return out

    def scaled(self, factor: float) -> "ClosedCurve":
        """Uniformly scaled copy (about the origin)."""
        f = float(factor)
        c = (self.center[0] * f, self.center[1] * f)
        if self.kind == "circle":
            return ClosedCurve.circle(self.radius * f, center=c)
        if self.kind == "ellipse":
            return ClosedCurve.ellipse(self.a * f, self.b * f, center=c)
        if self.kind == "star":
            return ClosedCurve.star(self.radius * f, self.amplitude, self.lobes, center=c)
        return ClosedCurve.fourier([x * f for x in self.cos], [x * f for x in self.sin], center=c)

    # evaluation ---------------------------------------------------------------

    def _radial(self, th):
        if self.kind == "star":
            k = self.lobes
            r = self.radius * (1 + self.amplitude * np.cos(k * th))
            dr = -self.radius * self.amplitude * k * np.sin(k * th)
            ddr = -self.radius * self.amplitude * k * k * np.cos(k * th)
            return r, dr, ddr
        r = np.zeros_like(th)
        dr = np.zeros_like(th)
        ddr = np.zeros_like(th)
        for k, c in enumerate(self.cos):
            r += c * np.cos(k * th)
            dr -= k * c * np.sin(k * th)
            ddr -= k * k * c * np.cos(k * th)
        for k, s in enumerate(self.sin):
            r += s * np.sin(k * th)
            dr += k * s * np.cos(k * th)
            ddr -= k * k * s * np.sin(k * th)
        return r, dr, ddr

    def derivatives(self, theta):
        """Return p, p', p'' as arrays of shape (n, 2)."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        c, s = np.cos(th), np.sin(th)
        if self.kind == "circle":
            R = self.radius
            p = R * np.stack([c, s], axis=-1)
            dp = R * np.stack([-s, c], axis=-1)
            ddp = -p
        elif self.kind == "ellipse":
            p = np.stack([self.a * c, self.b * s], axis=-1)
            dp = np.stack([-self.a * s, self.b * c], axis=-1)
            ddp = -p
        else:
            r, dr, ddr = self._radial(th)
            er = np.stack([c, s], axis=-1)
            et = np.stack([-s, c], axis=-1)
            p = r[:, None] * er
            dp = dr[:, None] * er + r[:, None] * et
            ddp = (ddr - r)[:, None] * er + 2 * dr[:, None] * et
        p = p + np.asarray(self.center)
        return p, dp, ddp

    def evaluate(self, theta):
        """Point, tangent p', outward unit normal, speed and signed curvature at theta."""
        p, dp, ddp = self.derivatives(theta)
        speed = np.hypot(dp[:, 0], dp[:, 1])
        normal = np.stack([dp[:, 1], -dp[:, 0]], axis=-1) / speed[:, None]
        curvature = (dp[:, 0] * ddp[:, 1] - dp[:, 1] * ddp[:, 0]) / speed**3
        return p, dp, normal, speed, curvature


def _pt(c) -> tuple[float, float]:
    c = tuple(float(v) for v in c)
    if len(c) != 2:
        raise ValueError("center must have two coordinates")
    return c


def curve_eval(curve: ClosedCurve, theta: float):
    """Scalar convenience wrapper around :meth:`ClosedCurve.evaluate`."""
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    p, dp, n, sp, k = curve.evaluate(theta)
    return p[0], dp[0], n[0], float(sp[0]), float(k[0])


@dataclass(frozen=True)
class PeriodicRule:
    """Trapezoidal rule with N equispaced parameter nodes on a closed curve."""

    curve: ClosedCurve
    n: int
    theta: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    tangents: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    speeds: np.ndarray = field(repr=False)
    curvatures: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def spacing(self) -> float:
        """Largest arclength gap between consecutive nodes."""
        return float(np.max(self.weights))

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def quadrature(curve: ClosedCurve, n: int) -> PeriodicRule:
    if int(n) != n or n < 8 or n % 2:
        raise ValueError(f"node count must be an even integer >= 8, got {n}")
    n = int(n)
    theta = 2 * np.pi * np.arange(n) / n
    p, dp, nrm, sp, k = curve.evaluate(theta)
    arrays = [theta, p, dp, nrm, sp, k, (2 * np.pi / n) * sp]
    for a in arrays:
        a.setflags(write=False)
    return PeriodicRule(curve, n, *arrays)


def boundary_length(curve: ClosedCurve, n: int = 256) -> float:
    return float(np.sum(quadrature(curve, n).weights))


def winding_number(curve: ClosedCurve, point=(0.0, 0.0), samples: int = _DENSE) -> int:
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    p = curve.derivatives(th)[0] - np.asarray(point, dtype=float)
    ang = np.arctan2(p[:, 1], p[:, 0])
    d = np.diff(np.append(ang, ang[0]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(round(np.sum(d) / (2 * np.pi)))


def inside(curve: ClosedCurve, points, samples: int = 4 * _DENSE) -> np.ndarray:
    """Point-in-curve test (even-odd ray casting on a dense polygon)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    poly = curve.derivatives(th)[0]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    px, py = pts[:, 0:1], pts[:, 1:2]
    crosses = (y0 > py) != (y1 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
    return np.sum(crosses & (px < xint), axis=1) % 2 == 1


def containment_radius(outer: ClosedCurve, inner: ClosedCurve, samples: int = _DENSE) -> float:
    """Lower bound on the largest eps with eps * closure(inner) inside outer.

    Ratio of the smallest radial distance on ``outer`` to the largest on
    ``inner``, both sampled at ``samples`` parameter values. Sufficient for the
    built-in families; not a general certificate.
    """
    if winding_number(outer) != 1 or winding_number(inner) != 1:
        raise ValueError("geometry violates 0 ∈ Ω^o ∩ ω^i")
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    ro = np.linalg.norm(outer.derivatives(th)[0], axis=1)
    ri = np.linalg.norm(inner.derivatives(th)[0], axis=1)
    return float(np.min(ro) / np.max(ri))
