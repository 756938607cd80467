"""Experiment configuration: JSON file + dotted ``key=value`` overrides."""
from __future__ import annotations

import copy
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .geometry import ClosedCurve, containment_radius, inside
from .model import FourierData, ProblemSpec, RobinNonlinearity, ScalingFamily

OUTPUT_ENV = "SMALLHOLE_OUTPUT_DIR"


def _default_problem() -> dict:
    return {
        "outer": {"kind": "ellipse", "a": 1.5, "b": 1.0},
        "inner": {"kind": "star", "radius": 1.0, "amplitude": 0.2, "lobes": 3},
        "g_outer": {"cos": [0.5, 0.2], "sin": [0.0, 0.0, 0.1]},
        "g_inner": {"cos": [0.3, 0.0, 0.2], "sin": [0.0, 0.1]},
        "scaling": {"delta_kind": "inv_eps_log", "d0": 1.0, "rho_kind": "linear", "rho_value": 0.5},
        "nonlinearity": "linear",
        "n_outer": 128,
        "n_inner": 128,
    }


@dataclass
class EpsGrid:
    eps_min: float = 5e-3
    eps_max: float = 0.3
    count: int = 12

    def values(self) -> np.ndarray:
        """Log-spaced, strictly decreasing."""
        if not (0 < self.eps_min < self.eps_max) or self.count < 1:
            raise ValueError("eps grid needs 0 < eps_min < eps_max and count >= 1")
        if self.count == 1:
            return np.array([self.eps_max])
        return np.geomspace(self.eps_max, self.eps_min, int(self.count))


@dataclass
class ExperimentConfig:
    problem: dict = field(default_factory=_default_problem)
    eps: float = 0.1
    eps_grid: EpsGrid = field(default_factory=EpsGrid)
    x_macro: list = field(default_factory=lambda: [0.5, 0.0])
    t_micro: list = field(default_factory=lambda: [1.5, 0.0])
    root_index: int = 0
    xi_bracket: float = 1e3
    xi_samples: int = 100_000
    linear_tol: float = 1e-10
    newton_tol: float = 1e-9
    newton_max_iter: int = 30
    convergence_n: list = field(default_factory=lambda: [32, 64, 128, 256])
    output_dir: str = "out"
    emit_plots: bool = True
    seed: int = 0
    workers: int = 1
    debug_flip_wstar_diagonal: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = copy.deepcopy(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        problem = _default_problem()
        problem.update(d.pop("problem", {}))
        grid = EpsGrid(**d.pop("eps_grid", {}))
        return cls(problem=problem, eps_grid=grid, **d)

    def to_dict(self) -> dict:
        return asdict(self)

    def build_problem(self) -> ProblemSpec:
        p = self.problem
        return ProblemSpec(
            outer=ClosedCurve.from_dict(p["outer"]),
            inner=ClosedCurve.from_dict(p["inner"]),
            g_outer=FourierData.from_dict(p["g_outer"]),
            g_inner=FourierData.from_dict(p["g_inner"]),
            scaling=ScalingFamily.from_dict(p["scaling"]),
            nonlinearity=RobinNonlinearity(p.get("nonlinearity", "linear")),
            n_outer=int(p["n_outer"]),
            n_inner=int(p["n_inner"]),
        )

    @property
    def out_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.output_dir)

    def validate(self) -> ProblemSpec:
        """Build the problem and reject configurations no solver could honour."""
        spec = self.build_problem()
        e0 = containment_radius(spec.outer, spec.inner)
        grid = self.eps_grid.values()
        for name, e in (("eps", self.eps), ("eps_grid.eps_max", grid[0])):
            if not 0 < e < min(e0, 1.0):
                raise ValueError(f"{name}={e} is not below the containment radius {e0:.6g}")
        if np.any(np.diff(grid) >= 0):
            raise ValueError("eps grid must be strictly decreasing")
        x = np.asarray(self.x_macro, dtype=float)
        t = np.asarray(self.t_micro, dtype=float)
        if not inside(spec.outer, x)[0]:
            raise ValueError("x_macro must lie inside the outer domain")
        if inside(spec.inner, t)[0]:
            raise ValueError("t_micro must lie outside the hole shape")
        for e in list(grid) + [self.eps]:
            if inside(spec.inner.scaled(e), x)[0]:
                raise ValueError(f"x_macro falls inside the hole at eps={e:.4g}")
            if not inside(spec.outer, e * t)[0]:
                raise ValueError(f"eps*t_micro leaves the outer domain at eps={e:.4g}")
        return spec


def parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(d: dict, overrides) -> dict:
    """Apply ``a.b.c=value`` strings to a nested dict (values parsed as JSON when possible)."""
    d = copy.deepcopy(d)
    for item in overrides or ():
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, val = item.split("=", 1)
        parts = key.strip().split(".")
        node = d
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ValueError(f"cannot descend into non-mapping at {key!r}")
        node[parts[-1]] = parse_value(val)
    return d


def load_config(path=None, overrides=()) -> ExperimentConfig:
    raw: dict = {}
    if path is not None:
        with open(path) as fh:
            raw = json.load(fh)
    return ExperimentConfig.from_dict(apply_overrides(raw, overrides))
