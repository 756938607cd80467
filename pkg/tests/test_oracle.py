import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smallhole.model import RobinNonlinearity, ScalingFamily
from smallhole.oracle import (ToyConfig, annulus_triple, toy_constant_nonlinear, toy_energy, toy_solution,
                              toy_solution_nonlinear, toy_xi_linear)

UNIT = ScalingFamily("power", d0=1.0, p=0.0, q=0.0, rho_kind="constant", rho_value=1.0)
FAMILIES = [
    UNIT,
    ScalingFamily("inv_eps_log", d0=1.0, rho_kind="linear", rho_value=0.5),
    ScalingFamily("inv_eps_log", d0=2.0, rho_kind="constant", rho_value=3.0),
    ScalingFamily("power", d0=1.5, p=-0.5, q=1.0, rho_kind="linear", rho_value=0.25),
    ScalingFamily("power", d0=0.7, p=1.0, q=-1.0, rho_kind="constant", rho_value=1.0),
]


def cube(a, b, scaling=UNIT):
    return ToyConfig(a, b, scaling, inverse=lambda eps, v: float(np.cbrt(v)))


def test_toy_solution_outer_boundary_value():
    assert toy_solution(ToyConfig(1.0, 0.0, UNIT), 0.1, [1.0, 0.0])[0] == pytest.approx(10 + math.log(10), rel=1e-15)
    assert toy_solution(ToyConfig(1.0, 0.0, UNIT), 0.1, [1.0, 0.0])[0] == pytest.approx(12.302585, abs=1e-6)


def test_toy_solution_zero_data():
    assert toy_solution(ToyConfig(0.0, 0.0, UNIT), 0.3, [[0.5, 0.1], [0.0, 1.0]]).tolist() == [0.0, 0.0]


def test_toy_solution_on_hole():
    assert toy_solution(ToyConfig(1.0, 0.0, UNIT), 0.1, [0.0, 0.1])[0] == pytest.approx(10.0, rel=1e-14)


@pytest.mark.parametrize("x", [[0.05, 0.0], [1.5, 0.0], [0.0, 0.0]])
def test_toy_solution_rejects_outside(x):
    with pytest.raises(ValueError, match="outside the closed annulus"):
        toy_solution(ToyConfig(1.0, 0.0, UNIT), 0.1, x)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
def test_toy_rejects_bad_eps(eps):
    with pytest.raises(ValueError):
        toy_solution(ToyConfig(1.0, 0.0, UNIT), eps, [0.5, 0.5])
    with pytest.raises(ValueError):
        toy_energy(ToyConfig(1.0, 0.0, UNIT), eps)


@pytest.mark.parametrize("scaling", FAMILIES)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), eps=st.floats(0.01, 0.6))
def test_toy_boundary_conditions(scaling, a, b, eps):
    cfg = ToyConfig(a, b, scaling)
    th = np.linspace(0, 2 * np.pi, 7)
    hole = eps * np.column_stack([np.cos(th), np.sin(th)])
    u = toy_solution(cfg, eps, hole)
    # u = a log r + B, so du/dr = a / r exactly; the Robin condition on |x| = eps reads a/eps = delta u + b/rho.
    lhs = a / eps
    rhs = scaling.delta(eps) * u + b / scaling.rho(eps)
    assert np.allclose(rhs, lhs, rtol=1e-12, atol=1e-12 * (1 + abs(b / scaling.rho(eps))))
    # Radial derivative at |x| = 1 by a centred difference inside the annulus.
    h = 1e-5
    fd = (toy_solution(cfg, eps, [1.0, 0.0]) - toy_solution(cfg, eps, [1 - 2 * h, 0.0])) / (2 * h)
    mid = (toy_solution(cfg, eps, [1 - h, 0.0]) - toy_solution(cfg, eps, [1 - 3 * h, 0.0])) / (2 * h)
    assert (2 * fd - mid)[0] == pytest.approx(a, abs=1e-6)


@pytest.mark.parametrize("scaling", FAMILIES)
def test_toy_rescaled_limit(scaling):
    a, b = 1.3, -0.7
    target = a - b * scaling.r0 - a * scaling.l0
    errs = []
    for eps in (1e-2, 1e-4, 1e-8, 1e-16):
        ed = scaling.eps_delta(eps)
        errs.append(abs(ed * toy_solution(ToyConfig(a, b, scaling), eps, [0.6, 0.0])[0] - target))
    assert errs[-1] < 0.1
    assert errs[-1] < errs[0] or errs[0] < 1e-12


def test_toy_rescaled_limit_unit_family_exact():
    # delta = rho = 1: eps u = a - b eps + eps a log|x| - eps a log eps, the error is O(eps log eps).
    cfg = ToyConfig(2.0, 1.0, UNIT)
    for eps in (1e-3, 1e-6):
        got = eps * toy_solution(cfg, eps, [0.5, 0.0])[0]
        exact = 2.0 - eps + eps * 2.0 * math.log(0.5 / eps)
        assert got == pytest.approx(exact, rel=1e-13)


def test_nonlinear_linear_family_matches():
    for scaling in FAMILIES:
        cfg = ToyConfig.from_nonlinearity(0.8, 0.4, scaling, RobinNonlinearity("linear"))
        x = [[0.3, 0.0], [0.0, 0.9], [0.2, 0.2]]
        assert np.allclose(toy_solution_nonlinear(cfg, 0.1, x), toy_solution(cfg, 0.1, x), rtol=1e-13, atol=1e-13)


def test_nonlinear_cube_root_examples():
    assert toy_constant_nonlinear(cube(1.0, 0.0), 0.1) == pytest.approx(10 ** (1 / 3) + math.log(10), rel=1e-14)
    assert toy_constant_nonlinear(cube(1.0, 0.0), 0.1) == pytest.approx(4.457019783025929, rel=1e-14)
    assert toy_constant_nonlinear(cube(0.0, 1.0), 0.1) == pytest.approx(-1.0, rel=1e-14)


def test_nonlinear_requires_inverse():
    with pytest.raises(ValueError, match="needs the inverse"):
        toy_solution_nonlinear(ToyConfig(1.0, 0.0, UNIT), 0.1, [0.5, 0.0])


def test_nonlinear_inverse_failure():
    def bad(eps, v):
        raise ValueError("domain")
    with pytest.raises(ValueError, match="F_eps not invertible at required value"):
        toy_constant_nonlinear(ToyConfig(1.0, 0.0, UNIT, bad), 0.1)


def test_nonlinear_saturating_out_of_range():
    cfg = ToyConfig.from_nonlinearity(5.0, 0.0, ScalingFamily(eta0=(0.5,)), RobinNonlinearity("saturating"))
    with pytest.raises(ValueError, match="not invertible"):
        toy_constant_nonlinear(cfg, 0.1)


@pytest.mark.parametrize("kind,eta0", [("cubic", (0.5,)), ("saturating", (2.0,))])
def test_nonlinear_robin_condition(kind, eta0):
    sc = ScalingFamily(eta0=eta0)
    nl = RobinNonlinearity(kind)
    cfg = ToyConfig.from_nonlinearity(0.6, 0.3, sc, nl)
    eps = 0.2
    u = toy_solution_nonlinear(cfg, eps, [eps, 0.0])[0]
    ed = sc.eps_delta(eps)
    # Raw family F_eps(u) = F(eps delta u) / (eps delta), and a/eps = delta F_eps(u) + b/rho.
    raw = float(nl.F(ed * u, sc.eta(eps))) / ed
    assert sc.delta(eps) * raw + 0.3 / sc.rho(eps) == pytest.approx(0.6 / eps, rel=1e-12)


def test_energy_examples():
    assert toy_energy(ToyConfig(1.0, 0.0), 0.1) == pytest.approx(2 * math.pi * math.log(10), rel=1e-15)
    assert toy_energy(ToyConfig(1.0, 0.0), 0.1) == pytest.approx(14.467568824830929, rel=1e-15)
    assert toy_energy(ToyConfig(0.0, 5.0), 0.1) == 0
    assert toy_energy(ToyConfig(2.0, 0.0), math.exp(-1)) == pytest.approx(8 * math.pi, rel=1e-15)


@given(b=st.floats(-5, 5), eps=st.floats(0.01, 0.9))
def test_energy_independent_of_b_and_scaling(b, eps):
    ref = toy_energy(ToyConfig(1.5, 0.0, UNIT), eps)
    for sc in FAMILIES:
        assert toy_energy(ToyConfig(1.5, b, sc), eps) == ref


def test_xi_linear_examples():
    assert toy_xi_linear(1.0, 2.0, 0.5, 0.25) == 0.0
    assert toy_xi_linear(3.0, 7.0, 0.0, 0.0) == 3.0
    assert toy_xi_linear(0.0, 2.0, 0.4, 0.25) == -0.5


def test_annulus_triple_constants():
    cfg = ToyConfig(1.0, 2.0, FAMILIES[1])
    tr = annulus_triple(cfg, 0.1, 16, 32)
    assert np.all(tr.mu_o == 0) and np.all(tr.mu_i == 1.0)
    B = toy_solution(cfg, 0.1, [1.0, 0.0])[0]
    assert tr.xi == pytest.approx(FAMILIES[1].eps_delta(0.1) * B, rel=1e-15)
