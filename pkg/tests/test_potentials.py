import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import iv

from smallhole import potentials as pot
from smallhole.geometry import ClosedCurve, quadrature

from conftest import BUILTIN_CURVES

CIRCLE = ClosedCurve.circle(1.0)


def test_S2_values():
    assert pot.S2([1.0, 0.0]) == 0.0
    assert pot.S2([np.e, 0.0]) == pytest.approx(1 / (2 * np.pi), rel=1e-15)
    assert np.allclose(pot.grad_S2([0.0, 2.0]), [0.0, 1 / (4 * np.pi)], rtol=1e-15)


def test_S2_singular_at_origin():
    with pytest.raises(ValueError):
        pot.S2([0.0, 0.0])
    with pytest.raises(ValueError):
        pot.grad_S2(np.array([[1.0, 0.0], [0.0, 0.0]]))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_grad_S2_matches_finite_differences(x, y):
    if np.hypot(x, y) < 0.1:
        return
    h = 1e-6
    fd = [(pot.S2([x + h, y]) - pot.S2([x - h, y])) / (2 * h), (pot.S2([x, y + h]) - pot.S2([x, y - h])) / (2 * h)]
    assert np.allclose(pot.grad_S2([x, y]), fd, atol=1e-8)


@pytest.mark.parametrize("target,expected", [((2.0, 0.0), np.log(2.0)), ((0.3, 0.0), 0.0)])
def test_offboundary_uniform_circle(target, expected):
    r = quadrature(CIRCLE, 64)
    assert pot.single_layer_offboundary(r, np.ones(64), [target])[0] == pytest.approx(expected, abs=1e-13)


def test_offboundary_zero_density():
    r = quadrature(BUILTIN_CURVES["star5"], 64)
    assert np.all(pot.single_layer_offboundary(r, np.zeros(64), [[0.1, 0.2], [3.0, 1.0]]) == 0)


def test_offboundary_rejects_near_targets():
    r = quadrature(CIRCLE, 32)
    with pytest.raises(ValueError, match="on-boundary"):
        pot.single_layer_offboundary(r, np.ones(32), [[1.01, 0.0]])


def test_offboundary_scaled_curve():
    r = quadrature(CIRCLE, 64)
    # Density 1 on the circle of radius 0.1 (unscaled weights): log|x| outside.
    assert pot.single_layer_offboundary(r, np.ones(64), [[0.5, 0.0]], scale=0.1)[0] == pytest.approx(np.log(0.5))


@pytest.mark.parametrize("R", [1.0, 2.0, 0.5])
def test_onboundary_uniform_circle(R):
    r = quadrature(ClosedCurve.circle(R), 64)
    assert np.allclose(pot.single_layer_onboundary(r, np.ones(64)), R * np.log(R), atol=1e-14)


def test_onboundary_rejects_odd_n():
    with pytest.raises(ValueError):
        pot.kress_log_weights(31)


@pytest.mark.parametrize("m", range(1, 17))
def test_onboundary_fourier_symbol(m):
    r = quadrature(CIRCLE, 64)
    c = np.cos(m * r.theta)
    assert np.max(np.abs(pot.single_layer_onboundary(r, c) + c / (2 * m))) < 1e-13


def test_onboundary_spectral_convergence():
    # exp(cos t) = I0(1) + 2 sum I_m(1) cos(mt); each mode maps to -cos(mt)/(2m).
    errs = []
    for n in (8, 16, 32):
        r = quadrature(CIRCLE, n)
        exact = sum(-2 * iv(m, 1.0) * np.cos(m * r.theta) / (2 * m) for m in range(1, 40))
        errs.append(np.max(np.abs(pot.single_layer_onboundary(r, np.exp(np.cos(r.theta))) - exact)))
    assert errs[1] < 0.1 * errs[0] and errs[2] < 1e-14 + 0.1 * errs[1]


def test_onboundary_matches_adaptive_quadrature():
    c = BUILTIN_CURVES["star5"]
    r = quadrature(c, 256)
    mu = np.cos(r.theta) + 0.5
    got = pot.single_layer_onboundary(r, mu)
    for i in (0, 17, 50):
        x = r.points[i]

        def f(s):
            p, dp, _ = c.derivatives(np.array([s]))
            return np.log(np.linalg.norm(x - p[0])) / (2 * np.pi) * (np.cos(s) + 0.5) * np.linalg.norm(dp[0])
        val = quad(f, r.theta[i] - np.pi, r.theta[i] + np.pi, points=[r.theta[i]], limit=200,
                   epsabs=1e-13)[0]
        assert got[i] == pytest.approx(val, abs=1e-10)


@pytest.mark.parametrize("R", [1.0, 2.0])
def test_wstar_circle_constant(R):
    r = quadrature(ClosedCurve.circle(R), 32)
    W = pot.wstar_self_matrix(r)
    assert np.allclose(W @ np.ones(32), 0.5, atol=1e-14)
    # Kernel nu(x).(x-y)/(2pi|x-y|^2) is 1/(4 pi R) everywhere on a circle.
    assert np.allclose(W / r.weights[None, :], 1 / (4 * np.pi * R), atol=1e-14)


def test_wstar_zero_density():
    r = quadrature(BUILTIN_CURVES["ellipse"], 32)
    assert np.all(pot.wstar_apply(r, r, np.zeros(32)) == 0)


@pytest.mark.parametrize("name", sorted(BUILTIN_CURVES))
def test_wstar_rows_match_adaptive_quadrature(name):
    """Row sums of W* against scipy quad of the smooth kernel (independent oracle)."""
    c = BUILTIN_CURVES[name]
    r = quadrature(c, 256)
    rows = pot.wstar_self_matrix(r) @ np.ones(256)
    for i in (0, 9, 40, 101):
        x, nu = r.points[i], r.normals[i]

        def f(s):
            p, dp, _ = c.derivatives(np.array([s]))
            d = x - p[0]
            return nu @ d / (2 * np.pi * (d @ d)) * np.linalg.norm(dp[0])
        val = quad(f, r.theta[i] + 1e-14, r.theta[i] + 2 * np.pi - 1e-14, limit=200, epsabs=1e-13)[0]
        assert rows[i] == pytest.approx(val, abs=1e-9)


def test_wstar_constant_not_half_off_circles():
    # Pointwise W*[1] = 1/2 would make the interior single layer of a constant
    # density constant, which only happens on circles.
    r = quadrature(BUILTIN_CURVES["ellipse"], 128)
    assert np.max(np.abs(pot.wstar_self_matrix(r) @ np.ones(128) - 0.5)) > 0.1


@pytest.mark.parametrize("name", sorted(BUILTIN_CURVES))
def test_wstar_transposed_constant(name):
    # Double layer of 1 equals -1/2 on the curve: sum_i w_i W*_ij = w_j / 2.
    r = quadrature(BUILTIN_CURVES[name], 128)
    assert np.max(np.abs(r.weights @ pot.wstar_self_matrix(r) / r.weights - 0.5)) < 1e-9


def test_wstar_cross_rejects_close_curves():
    a = quadrature(CIRCLE, 32)
    with pytest.raises(ValueError, match="increase N or reduce eps"):
        pot.wstar_cross_matrix(a, a, 1.0, 0.99)


@pytest.mark.parametrize("curve,n,tol", [(CIRCLE, 32, 1e-12), (ClosedCurve.ellipse(2, 1), 64, 1e-10),
                                         (ClosedCurve.star(1, 0.3, 5), 128, 1e-8)])
def test_gauss_point_flux(curve, n, tol):
    assert abs(pot.gauss_point_flux(quadrature(curve, n)) - 1) < tol


@pytest.mark.parametrize("name", sorted(BUILTIN_CURVES))
def test_gauss_flux_dichotomy(name):
    d = BUILTIN_CURVES[name].to_dict()
    shifted = ClosedCurve.from_dict({**d, "center": [7.0, -2.0]})
    assert abs(pot.gauss_point_flux(quadrature(shifted, 128))) < 1e-10


def test_neumann_trace_circle_constant():
    r = quadrature(CIRCLE, 32)
    assert np.allclose(pot.neumann_trace(r, np.ones(32), "interior"), 0, atol=1e-14)
    assert np.allclose(pot.neumann_trace(r, np.ones(32), "exterior"), 1, atol=1e-14)
    assert np.all(pot.neumann_trace(r, np.zeros(32), "interior") == 0)
    with pytest.raises(ValueError):
        pot.neumann_trace(r, np.ones(32), "inside")


@given(st.sampled_from(sorted(BUILTIN_CURVES)), st.lists(st.floats(-2, 2), min_size=5, max_size=5))
def test_jump_identity_and_flux(name, coef):
    r = quadrature(BUILTIN_CURVES[name], 128)
    mu = coef[0] + coef[1] * np.cos(r.theta) + coef[2] * np.sin(2 * r.theta) + coef[3] * np.cos(3 * r.theta) \
        + coef[4] * np.sin(r.theta)
    ext = pot.neumann_trace(r, mu, "exterior")
    inn = pot.neumann_trace(r, mu, "interior")
    assert np.max(np.abs(ext - inn - mu)) < 1e-12
    # The interior problem carries no net flux.
    assert abs(r.integrate(inn)) < 1e-9 * (1 + np.max(np.abs(mu)))


def test_interior_trace_matches_field_derivative():
    # v[cos t] = -(r/2) cos t inside the unit circle, so dv/dr = -cos t / 2.
    r = quadrature(CIRCLE, 64)
    mu = np.cos(r.theta)
    assert np.allclose(pot.neumann_trace(r, mu, "interior"), -0.5 * mu, atol=1e-14)
    pts = 0.5 * r.points[:5]
    assert np.allclose(pot.single_layer_offboundary(r, mu, pts), -0.25 * mu[:5], atol=1e-14)


def test_offboundary_is_harmonic():
    r = quadrature(BUILTIN_CURVES["star3"], 128)
    mu = 1 + np.sin(2 * r.theta)
    h = 1e-3
    for x in ([0.2, 0.1], [2.0, -1.0]):
        x = np.asarray(x)
        st5 = np.array([x, x + [h, 0], x - [h, 0], x + [0, h], x - [0, h]])
        v = pot.single_layer_offboundary(r, mu, st5)
        lap = (v[1:].sum() - 4 * v[0]) / h**2
        assert abs(lap) < 1e-4
