import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wtr.basis import multi_eval
from wtr.elliptic import curve_constants, p_eval
from wtr.identities import b_loop_value, literal_sign, sample_points
from wtr.recursion import run_to_level
from wtr.wavefunction import (
    PertWave,
    b_integral_specialized,
    collect_orders,
    ghat_zero_term,
    operator_check_A,
    operator_check_B,
    operator_residuals_A,
    operator_residuals_B,
)


@pytest.fixture(scope="module")
def t40():
    return run_to_level(4, curve_constants(complex(0.3, 1.2), 40))


@pytest.fixture(scope="module")
def t30_literal():
    return run_to_level(4, curve_constants(complex(0.3, 1.2), 30), orientation=1)


@pytest.fixture(scope="module")
def t30():
    return run_to_level(4, curve_constants(complex(0.3, 1.2), 30))


def _tol(c):
    return c.num.ctx.mpf(10) ** (15 - c.prec)


def _z(c, seed=1):
    return sample_points(c, 1, 1, seed=seed)[0][0]


def test_order_zero_is_curve(t40):
    c = t40.curve
    cur = c.num
    z = _z(c)
    a, _ = PertWave(t40, 0).x_derivs(0, z)
    x = p_eval("wp", z, cur)
    assert abs(a**2 - (4 * x**3 - cur.g2 * x - cur.g3)) < _tol(c)


def test_order_one(t40):
    """2 S0' S1' + S0'' - 2 P1 = 0 in x-derivatives."""
    c = t40.curve
    z = _z(c, 3)
    w = PertWave(t40, 1)
    a0, b0 = w.x_derivs(0, z)
    a1, _ = w.x_derivs(1, z)
    assert abs(2 * a0 * a1 + b0 - 2 * p_eval("P1", z, c.num)) < _tol(c)


def test_two_point_regularisation():
    """wp'(u)wp'(v)/(wp(u)-wp(v))^2 = wp(u-v) - wp(u+v), so the regularised W02 is P2(u+v)."""
    c = curve_constants(complex(-0.4, 0.9), 40)
    cur = c.num
    for u, v in sample_points(c, 4, 2, seed=8):
        lhs = p_eval("wp1", u, cur) * p_eval("wp1", v, cur) / (p_eval("wp", u, cur) - p_eval("wp", v, cur)) ** 2
        assert abs(lhs - (p_eval("wp", u - v, cur) - p_eval("wp", u + v, cur))) < _tol(c)
        reg = p_eval("P2", u - v, cur) - lhs
        assert abs(reg - p_eval("P2", u + v, cur)) < _tol(c)


def test_s1_from_double_integral():
    """dS1/dz is the z-derivative of half the double integral of P2(u+v)."""
    c = curve_constants(complex(0, 2), 25)
    t = run_to_level(1, c)
    cur = c.num
    z = _z(c, 5)
    quad = cur.ctx.quad(lambda s: p_eval("P2", z + s * z, cur) * z, [0, 1])
    assert abs(PertWave(t, 1).z_derivs(1, z)[0] - quad) < 1e-18


def test_s1_log_wp1_piece(t40):
    """The (0,2) term equals P1 - wp''/(2 wp'), i.e. P1 plus the derivative of -log(wp')/2."""
    c = t40.curve
    cur = c.num
    z = _z(c, 6)
    s1 = PertWave(t40, 1).z_derivs(1, z)[0]
    ref = p_eval("P1", z, cur) - p_eval("P2d", z, cur, 2) / (2 * p_eval("wp1", z, cur))
    assert abs(s1 - ref) < _tol(c)


@pytest.mark.parametrize("k", range(6))
def test_second_derivative_finite_difference(t30, k):
    c = t30.curve
    ctx = c.num.ctx
    w = PertWave(t30, 5)
    z = _z(c, 2)
    fd = ctx.diff(lambda u: w.z_derivs(k, u)[0], z)
    assert abs(w.z_derivs(k, z)[1] - fd) < 1e-18


def test_x_derivative_conversion(t30):
    c = t30.curve
    cur = c.num
    ctx = cur.ctx
    w = PertWave(t30, 2)
    z = _z(c, 4)
    a, b = w.x_derivs(2, z)
    fd = ctx.diff(lambda u: w.x_derivs(2, u)[0], z) / p_eval("wp1", z, cur)
    assert abs(b - fd) < 1e-18


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 5), st.floats(0.05, 0.95), st.floats(0.05, 0.3))
def test_parity(t30, k, x, y):
    """S_k(-z) = (-1)^(k+1) S_k(z), so S_k'(-z) = (-1)^k S_k'(z)."""
    c = t30.curve
    cur = c.num
    z = cur.ctx.mpf(x) + cur.tau * y
    w = PertWave(t30, 5)
    a = w.z_derivs(k, z)[0]
    b = w.z_derivs(k, -z)[0]
    assert abs(b - (-1) ** k * a) <= (abs(a) + 1) * _tol(c)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=14, max_size=14))
def test_collect_orders_matches_polynomial_product(vals):
    """Collector against a direct product of truncated polynomials in hbar."""
    first, second = vals[:7], vals[7:]
    a = np.array(first)  # hbar * sum hbar^(k-1) S_k' = sum hbar^k S_k'
    b = np.concatenate([[0.0], second])  # hbar^2 * sum hbar^(k-1) S_k''
    full = np.convolve(a, a)[:7] + b[:7]
    got = collect_orders(first, second, 6)
    assert np.allclose(got, full, rtol=1e-12, atol=1e-12)


def test_ghat_against_double_quadrature():
    c = curve_constants(complex(0, 2), 20)
    t = run_to_level(1, c)
    ctx = c.num.ctx
    z = _z(c, 9)
    sign = literal_sign(t, 0, 3)

    def f(s, r):
        return multi_eval(t.W[(0, 3)], [ctx.mpc(0), s * z, r * z], c) * z * z

    quad = -sign * ctx.quad(f, [0, 1], [0, 1])
    assert abs(ghat_zero_term(0, 2, z, t) - quad) < 1e-12


@pytest.mark.parametrize("g", [1, 2])
def test_b_integral_derivative_is_pointwise_b(t30, g):
    """For one spectator the specialised integral differentiates to the contour value of B."""
    c = t30.curve
    ctx = c.num.ctx
    z = _z(c, 12)
    d = ctx.diff(lambda u: b_integral_specialized(g, 1, u, t30), z)
    assert abs(d - b_loop_value(g, 1, t30, [z])) < 1e-18


def test_operators_through_order_five(t40):
    c = t40.curve
    zs = [s[0] for s in sample_points(c, 2, 1, seed=21)]
    ra = operator_check_A(5, zs, t40)
    rb = operator_check_B(5, zs, t40)
    tol = c.num.ctx.mpf(10) ** (25 - c.prec)
    assert len(ra) == len(rb) == 12
    for a, b in zip(ra, rb):
        assert (a.order, a.point) == (b.order, b.point)
        assert abs(a.value) < tol and abs(b.value) < tol
        assert abs(a.value - b.value) < tol


def test_operator_b_sign_matters(t40):
    """Flipping the sign of the B-integrals breaks the second operator at order 2."""
    c = t40.curve
    z = _z(c, 13)
    res = operator_residuals_B(2, z, t40)
    flip = 4 * b_integral_specialized(1, 0, z, t40) + 4 * b_integral_specialized(0, 2, z, t40) / 2
    assert abs(res[2]) < _tol(c)
    assert abs(res[2] - flip) > 1e-5


def test_operators_orientation_independent(t30, t30_literal):
    z = _z(t30.curve, 14)
    a = operator_residuals_A(3, z, t30)
    b = operator_residuals_A(3, z, t30_literal)
    for u, v in zip(a, b):
        assert abs(u - v) < _tol(t30.curve)


def test_order_limits(t30):
    with pytest.raises(ValueError):
        operator_residuals_A(6, 0.3, t30)
    shallow = run_to_level(2, t30.curve)
    with pytest.raises(ValueError):
        operator_residuals_B(4, 0.3, shallow)


def test_factorials_are_exact(t40):
    """S_3 mixes a 1/3! weight; exact division keeps it at working precision."""
    c = t40.curve
    z = _z(c, 1)
    w = PertWave(t40, 3)
    ctx = c.num.ctx
    fd = ctx.diff(lambda u: w.z_derivs(3, u)[0], z)
    assert abs(w.z_derivs(3, z)[1] - fd) < ctx.mpf(10) ** -30
