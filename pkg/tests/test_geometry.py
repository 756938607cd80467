import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smallhole.geometry import (ClosedCurve, boundary_length, containment_radius, curve_eval, inside,
                                quadrature, winding_number)

from conftest import BUILTIN_CURVES


def test_unit_circle_at_zero():
    p, dp, n, speed, kappa = curve_eval(ClosedCurve.circle(1.0), 0.0)
    assert np.allclose(p, [1, 0]) and np.allclose(n, [1, 0])
    assert speed == pytest.approx(1.0) and kappa == pytest.approx(1.0)


def test_ellipse_top_point():
    p, dp, n, speed, kappa = curve_eval(ClosedCurve.ellipse(2, 1), np.pi / 2)
    assert np.allclose(p, [0, 1], atol=1e-15)
    assert np.allclose(n, [0, 1], atol=1e-15)
    assert speed == pytest.approx(2.0)
    # ab / (a^2 sin^2 + b^2 cos^2)^(3/2) = 2 / 8 at the end of the minor axis.
    assert kappa == pytest.approx(0.25)


@pytest.mark.parametrize("theta", [0.0, 0.7, 3.0, 5.5])
def test_circle_radius_two_curvature(theta):
    assert curve_eval(ClosedCurve.circle(2.0), theta)[4] == pytest.approx(0.5)


def test_ellipse_curvature_formula():
    a, b = 2.0, 1.0
    th = np.linspace(0, 2 * np.pi, 50)
    kappa = ClosedCurve.ellipse(a, b).evaluate(th)[4]
    exact = a * b / (a**2 * np.sin(th) ** 2 + b**2 * np.cos(th) ** 2) ** 1.5
    assert np.allclose(kappa, exact, rtol=1e-13)


@pytest.mark.parametrize("bad", [
    lambda: ClosedCurve.circle(0.0),
    lambda: ClosedCurve.circle(-1.0),
    lambda: ClosedCurve.ellipse(1.0, 0.0),
    lambda: ClosedCurve.star(1.0, 1.0, 3),
    lambda: ClosedCurve.star(1.0, 0.2, 0),
    lambda: ClosedCurve.fourier([0.1, 0.5]),
    lambda: ClosedCurve("triangle"),
])
def test_invalid_shapes_rejected_at_construction(bad):
    with pytest.raises(ValueError):
        bad()


def test_circle_length_n16():
    assert abs(np.sum(quadrature(ClosedCurve.circle(1), 16).weights) - 2 * np.pi) < 1e-14


def test_ellipse_perimeter():
    assert abs(boundary_length(ClosedCurve.ellipse(2, 1), 64) - 9.688448220547676) < 1e-10


def test_ellipse_perimeter_against_scipy():
    # Independent check: complete elliptic integral of the second kind.
    from scipy.special import ellipe
    assert boundary_length(ClosedCurve.ellipse(2, 1), 64) == pytest.approx(4 * 2 * ellipe(1 - 0.25), abs=1e-12)


def test_star_length_self_convergence():
    star = ClosedCurve.star(1.0, 0.3, 5)
    lengths = [boundary_length(star, n) for n in (16, 32, 64, 128, 256)]
    diffs = np.abs(np.diff(lengths))
    assert diffs[-1] < 1e-12
    nz = diffs[diffs > 1e-13]
    assert np.all(nz[1:] < 0.5 * nz[:-1])


@pytest.mark.parametrize("n", [7, 6, 9, 10.5])
def test_bad_node_counts(n):
    with pytest.raises(ValueError):
        quadrature(ClosedCurve.circle(1), n)


def test_rule_arrays_read_only():
    r = quadrature(ClosedCurve.circle(1), 16)
    with pytest.raises(ValueError):
        r.weights[0] = 1.0


@pytest.mark.parametrize("outer,inner,expected", [
    (ClosedCurve.circle(1), ClosedCurve.circle(1), 1.0),
    (ClosedCurve.circle(2), ClosedCurve.circle(1), 2.0),
    (ClosedCurve.ellipse(2, 1), ClosedCurve.circle(1), 1.0),
])
def test_containment_radius(outer, inner, expected):
    assert containment_radius(outer, inner) == pytest.approx(expected, rel=1e-12)


def test_containment_radius_origin_not_enclosed():
    with pytest.raises(ValueError, match="geometry violates"):
        containment_radius(ClosedCurve.circle(1, center=(3, 0)), ClosedCurve.circle(1))


@pytest.mark.parametrize("name", sorted(BUILTIN_CURVES))
def test_normals_and_winding(name):
    c = BUILTIN_CURVES[name]
    th = np.linspace(0, 2 * np.pi, 97)
    p, dp, n, speed, _ = c.evaluate(th)
    assert np.max(np.abs(np.einsum("ik,ik->i", n, dp))) < 1e-13
    assert np.max(np.abs(np.hypot(n[:, 0], n[:, 1]) - 1)) < 1e-13
    assert np.all(speed > 0)
    assert winding_number(c) == 1
    # Outward: a step along the normal leaves the curve.
    assert not np.any(inside(c, p + 1e-3 * n))
    assert np.all(inside(c, p - 1e-3 * n))


@pytest.mark.parametrize("name", sorted(BUILTIN_CURVES))
def test_curvature_matches_finite_differences(name):
    c = BUILTIN_CURVES[name]
    th = np.linspace(0.1, 6.0, 11)
    h = 1e-5
    t_plus = c.evaluate(th + h)[1]
    t_minus = c.evaluate(th - h)[1]
    _, dp, _, sp, kappa = c.evaluate(th)
    ddp = (t_plus - t_minus) / (2 * h)
    fd = (dp[:, 0] * ddp[:, 1] - dp[:, 1] * ddp[:, 0]) / sp**3
    assert np.allclose(kappa, fd, atol=1e-7)


@given(st.integers(min_value=1, max_value=7))
def test_trig_exactness_on_circle(m):
    r = quadrature(ClosedCurve.circle(1.0), 16)
    assert abs(r.integrate(np.cos(m * r.theta))) < 1e-14


@given(st.sampled_from(sorted(BUILTIN_CURVES)), st.floats(0.2, 5.0))
def test_length_homogeneous_degree_one(name, f):
    c = BUILTIN_CURVES[name]
    assert boundary_length(c.scaled(f), 256) == pytest.approx(f * boundary_length(c, 256), rel=1e-13)


@given(st.floats(0.05, 0.95), st.integers(1, 8))
def test_star_params_accepted_and_simple(amp, lobes):
    c = ClosedCurve.star(1.0, amp, lobes)
    assert winding_number(c) == 1


def test_dict_round_trip():
    for c in BUILTIN_CURVES.values():
        assert ClosedCurve.from_dict(c.to_dict()) == c
