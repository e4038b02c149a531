import mpmath
import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from wtr.algebra import CycOmega
from wtr.elliptic import (
    ConvergenceError,
    curve_constants,
    eisenstein,
    g2_transform_residual,
    lambert_sum,
    p_eval,
    theta_deriv,
    wp_expand_at_halfperiod,
    wp_expand_at_zero,
    wp_taylor_at,
)

TAUS = [complex(0, 2), complex(0.3, 1.2), complex(-0.4, 0.9)]


@pytest.fixture(scope="module", params=TAUS, ids=["2i", "0.3+1.2i", "-0.4+0.9i"])
def curve(request):
    return curve_constants(request.param, 40)


@pytest.fixture(scope="module")
def special():
    return curve_constants("special", 40)


def _lattice_sum(tau, weight, n):
    m, k = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1))
    w = m + k * tau
    w = w[(m != 0) | (k != 0)]
    return np.sum(w.astype(complex) ** (-weight))


def test_q_to_zero_limits():
    c = curve_constants(complex(0, 1e6), 30)
    pi = c.ctx.pi
    assert abs(c.G2 - pi**2 / 3) < 1e-25
    assert abs(c.G4 - pi**4 / 45) < 1e-25
    assert abs(c.G6 - 2 * pi**6 / 945) < 1e-25


def test_g4_g6_against_lattice_sum():
    """Truncated lattice sums are an independent route to G4, G6 and G8."""
    c = curve_constants(complex(0, 2), 30)
    assert abs(complex(c.G6) - _lattice_sum(2j, 6, 80)) < 1e-9
    assert abs(complex(eisenstein(8, c)) - _lattice_sum(2j, 8, 60)) < 1e-12
    assert abs(complex(eisenstein(8, c)) - 3 * complex(c.G4) ** 2 / 7) < 1e-12


def test_higher_eisenstein_against_lattice_sum():
    c = curve_constants(complex(0.3, 1.2), 30)
    for w in (10, 12):
        assert abs(complex(eisenstein(w, c)) - _lattice_sum(0.3 + 1.2j, w, 40)) < 1e-12


@pytest.mark.parametrize("tau", TAUS)
def test_g2_quasi_modularity(tau):
    assert abs(g2_transform_residual(tau, 40)) < 1e-35


def test_lambert_rejects_unit_circle():
    with pytest.raises(ConvergenceError):
        lambert_sum(1, mpmath.mpc(1), mpmath.mp)


def test_lower_half_plane_rejected():
    with pytest.raises(ConvergenceError):
        curve_constants(complex(0.5, -0.2), 20)


def test_special_constants(special):
    assert special.g2 == 0 and special.g3 == 4 and special.delta == -432
    assert special.e == (CycOmega(1), CycOmega(0, 1), CycOmega(-1, -1))
    n = special.numeric
    for h, e in zip(n.half_periods, special.e):
        assert abs(p_eval("wp", h, n) - e.to_complex(n.ctx)) < 1e-35


def test_special_quantization_locus():
    ctx = mpmath.MPContext()
    ctx.dps = 40
    c = curve_constants(ctx.expjpi(ctx.mpf(2) / 3), 40)
    assert abs(c.g2) < 1e-35


def test_vieta(curve):
    e1, e2, e3 = curve.e
    assert abs(e1 + e2 + e3) < 1e-35
    assert abs(e1 * e2 * e3 - curve.g3 / 4) < 1e-33
    d = 16 * ((e1 - e2) * (e2 - e3) * (e3 - e1)) ** 2
    assert abs(curve.delta - d) < 1e-30 * abs(d)


def test_wp_against_theta_oracle(curve):
    """Classical theta-quotient formula evaluated with mpmath."""
    z = curve.ctx.mpc("0.21", "0.13")
    mp = mpmath.mp.clone() if hasattr(mpmath.mp, "clone") else mpmath.mp
    with mpmath.workdps(50):
        nome = mpmath.expjpi(mpmath.mpc(curve.tau))
        t2, t3 = mpmath.jtheta(2, 0, nome), mpmath.jtheta(3, 0, nome)
        zz = mpmath.pi * mpmath.mpc(z)
        orac = (mpmath.pi * t2 * t3 * mpmath.jtheta(4, zz, nome) / mpmath.jtheta(1, zz, nome)) ** 2
        orac -= mpmath.pi**2 / 3 * (t2**4 + t3**4)
        assert abs(orac - p_eval("wp", z, curve)) < 1e-35


def test_theta_against_mpmath(curve):
    z = curve.ctx.mpc("0.17", "-0.08")
    with mpmath.workdps(50):
        nome = mpmath.expjpi(mpmath.mpc(curve.tau))
        for d in range(4):
            ref = -mpmath.jtheta(1, mpmath.pi * z, nome, d) * mpmath.pi**d
            assert abs(theta_deriv(d, z, curve) - ref) < 1e-33 * (1 + abs(ref))


def test_theta_basic(curve):
    z = curve.ctx.mpc("0.31", "0.07")
    assert abs(theta_deriv(0, 0, curve)) < 1e-38
    assert abs(theta_deriv(0, z + 1, curve) + theta_deriv(0, z, curve)) < 1e-35
    assert abs(theta_deriv(1, 0, curve)) > 0.1


points = st.tuples(st.floats(0.05, 0.95), st.floats(-0.4, 0.4))


@settings(max_examples=15, deadline=None)
@given(points)
def test_ellipticity_and_ode(pt):
    for tau in TAUS:
        c = curve_constants(tau, 30) if tau != TAUS[0] else _C2I
        z = c.ctx.mpc(pt[0], pt[1] * c.tau.imag)
        wp = p_eval("wp", z, c)
        d = p_eval("wp1", z, c)
        assert abs(p_eval("wp", z + 1, c) - wp) < 1e-25 * (1 + abs(wp))
        assert abs(p_eval("wp", z + c.tau, c) - wp) < 1e-25 * (1 + abs(wp))
        assert abs(d**2 - (4 * wp**3 - c.g2 * wp - c.g3)) < 1e-22 * (1 + abs(wp) ** 3)
        p1 = p_eval("P1", z, c)
        assert abs(p_eval("P1", -z, c) + p1) < 1e-25 * (1 + abs(p1))
        assert abs(p_eval("P1", z + c.tau, c) - p1 - 2j * c.ctx.pi) < 1e-25 * (1 + abs(p1))
        assert abs(p_eval("zeta", z, c) - (-p1 + c.G2 * z)) < 1e-25 * (1 + abs(p1))


_C2I = curve_constants(TAUS[0], 30)


def test_p1_derivative_is_p2(curve):
    z = curve.ctx.mpc("0.3", "0.05")
    h = curve.ctx.mpf(10) ** -10
    fd = (p_eval("P1", z + h, curve) - p_eval("P1", z - h, curve)) / (2 * h)
    assert abs(fd - p_eval("P2", z, curve)) < 1e-15


def test_branch_points(curve):
    for h, e in zip(curve.half_periods, curve.e):
        assert abs(p_eval("wp1", h, curve)) < 1e-30
        assert abs(p_eval("wp", h, curve) - e) < 1e-33


def test_expansion_at_zero_first_terms(curve):
    s = wp_expand_at_zero(8, curve)
    assert s.min_exp == -2 and s[-2] == 1
    assert s[2] == 3 * curve.G4 and s[4] == 5 * curve.G6
    assert all(s[k] == 0 for k in range(-1, 8, 2))


def test_expansion_at_zero_special(special):
    s = wp_expand_at_zero(10, special)
    assert s[2] == 0 and s[4] == mpq(1, 7)


def test_expansion_at_zero_matches_eval(curve):
    s = wp_expand_at_zero(40, curve)
    t = curve.ctx.mpf("0.01") * curve.ctx.mpc(1, 1)
    assert abs(s.evaluate(t) - p_eval("wp", t, curve)) < 1e-32


def test_halfperiod_expansion(curve):
    for a in (1, 2, 3):
        s = wp_expand_at_halfperiod(a, 40, curve)
        e = curve.e[a - 1]
        assert abs(s[2] - (3 * e**2 - curve.g2 / 4)) < 1e-30
        assert all(s[k] == 0 for k in range(1, 40, 2))
        t = curve.ctx.mpf("0.01")
        assert abs(s.evaluate(t) - p_eval("wp", curve.half_periods[a - 1] + t, curve)) < 1e-32


def test_halfperiod_expansion_special(special):
    s = wp_expand_at_halfperiod(1, 6, special)
    assert s[0] == 1 and s[2] == 3


def test_taylor_at_point(curve):
    p = curve.ctx.mpc("0.27", "0.11")
    s = wp_taylor_at(p, 40, curve)
    assert abs(s[3] * 6 - 12 * s[0] * s[1]) < 1e-30
    d = wp_taylor_at(p, 41, curve)
    from wtr.algebra import laurent_diff

    assert abs(laurent_diff(d)[0] - p_eval("wp1", p, curve)) < 1e-30
    t = curve.ctx.mpf("0.01")
    assert abs(s.evaluate(t) - p_eval("wp", p + t, curve)) < 1e-32
