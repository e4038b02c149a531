import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from golden import GOLDEN, golden_basis, golden_value
from wtr.basis import multi_eval
from wtr.elliptic import curve_constants
from wtr.recursion import (
    ORIENTATION,
    RecursionError,
    free_energy,
    kernel_form_value,
    level,
    run_to_level,
)

TAUS = [complex(0, 2), complex(0.3, 1.2), complex(-0.4, 0.9)]
POINTS = [("0.31", "0.27"), ("-0.12", "0.44"), ("0.2", "-0.35"), ("0.07", "0.18"), ("0.43", "0.05")]


@pytest.fixture(scope="module", params=TAUS, ids=["2i", "0.3+1.2i", "-0.4+0.9i"])
def table(request):
    return run_to_level(2, curve_constants(request.param, 40))


@pytest.fixture(scope="module")
def exact_table():
    return run_to_level(3, curve_constants("special", 30, mode="exact"))


@pytest.fixture(scope="module")
def numeric_l3():
    return run_to_level(3, curve_constants(complex(0.1, 1.1), 30))


def _pts(c, n):
    return [c.ctx.mpc(*p) for p in POINTS[:n]]


@pytest.mark.parametrize("key", list(GOLDEN))
def test_golden_numeric(table, key):
    """Recursion output agrees pointwise with the closed forms."""
    c = table.curve
    zs = _pts(c, key[1])
    got = multi_eval(table.W[key], zs, c)
    ref = golden_value(key, zs, c)
    assert abs(got - ref) <= abs(ref) * c.ctx.mpf(10) ** -35


@pytest.mark.parametrize("key", list(GOLDEN))
def test_golden_exact(exact_table, key):
    ref = golden_basis(key, exact_table.curve)
    assert exact_table.W[key].terms == ref


def test_level_one_keys():
    t = run_to_level(1, curve_constants("special", 20, mode="exact"))
    assert set(t.keys()) == {(0, 1), (0, 2), (0, 3), (1, 1)}


def test_level_three_keys(exact_table):
    assert {(0, 5), (1, 3), (2, 1)} <= set(exact_table.W)
    assert all(level(*k) <= 3 for k in exact_table.W)


def test_level_cap():
    with pytest.raises(ValueError):
        run_to_level(5, curve_constants("special", 20, mode="exact"))


def test_orientation_sign():
    assert ORIENTATION == -1


def test_poles_only_at_half_periods(exact_table):
    """Stable correlators are built from even derivatives at nonzero half-periods."""
    for W in exact_table.W.values():
        for key in W.terms:
            for f in key:
                assert f is not None and f[0] in (1, 2, 3) and f[1] % 2 == 0


def test_symmetry_exact(exact_table):
    for W in exact_table.W.values():
        for perm in itertools.permutations(range(W.n)):
            assert W.permuted(perm).terms == W.terms


@settings(max_examples=15, deadline=None)
@given(st.permutations(range(4)), st.floats(-0.45, 0.45), st.floats(-0.3, 0.3))
def test_symmetry_numeric(numeric_l3, perm, x, y):
    c = numeric_l3.curve
    zs = [c.ctx.mpc(x, y)] + _pts(c, 3)
    W = numeric_l3.W[(0, 4)]
    a = multi_eval(W, zs, c)
    b = multi_eval(W, [zs[p] for p in perm], c)
    assert abs(a - b) <= (abs(a) + 1) * c.ctx.mpf(10) ** -25


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.45, 0.45), st.floats(-0.3, 0.3))
def test_alpha_independence(numeric_l3, ax, ay):
    """The base point of the kernel drops out of the recursion."""
    c = numeric_l3.curve
    z0, z1, z2 = _pts(c, 3)
    alpha = c.ctx.mpc(ax, ay)
    for (g, n1), spect in (((1, 2), [z1]), ((0, 4), [z1, z2, z0 / 3]), ((2, 1), [])):
        got = kernel_form_value(g, n1, numeric_l3, z0, spect, alpha)
        ref = multi_eval(numeric_l3.W[(g, n1)], [z0] + spect, c)
        assert abs(got - ref) <= (abs(ref) + 1e-10) * c.ctx.mpf(10) ** -20


def test_zero_a_period_structural(exact_table):
    """No constant factor survives in any slot, so every A-period vanishes."""
    for W in exact_table.W.values():
        for j in range(W.n):
            assert None not in W.slice_terms(j)


def test_zero_a_period_quadrature():
    """Direct integration of W_{1,1} and W_{1,2} along a shifted A-cycle."""
    c = curve_constants(complex(0.2, 1.4), 20)
    t = run_to_level(2, c)
    ctx = c.ctx
    h = ctx.mpc(0, ctx.mpf("0.2"))
    z1 = ctx.mpc("0.13", "0.61")
    v11 = ctx.quad(lambda s: multi_eval(t.W[(1, 1)], [h + s], c), [0, 0.5, 1])
    v12 = ctx.quad(lambda s: multi_eval(t.W[(1, 2)], [h + s, z1], c), [0, 0.5, 1])
    assert abs(v11) < 1e-15 and abs(v12) < 1e-15


def test_free_energy_exact_shift(exact_table):
    """The primitive of y dx is defined up to a constant that must drop out."""
    assert free_energy(2, exact_table) == free_energy(2, exact_table, shift=17)


def test_free_energy_numeric_shift(numeric_l3):
    c = numeric_l3.curve
    a = free_energy(2, numeric_l3)
    b = free_energy(2, numeric_l3, shift=c.ctx.mpc(17, -3))
    assert abs(a - b) <= abs(a) * c.ctx.mpf(10) ** -25


def test_free_energy_special_consistency(exact_table):
    """Exact value on the special curve agrees with its numeric twin."""
    num = run_to_level(3, curve_constants("special", 30, mode="numeric"))
    ex = exact_table.curve.to_num(free_energy(2, exact_table))
    nv = free_energy(2, num)
    assert abs(ex - nv) <= abs(nv) * num.curve.ctx.mpf(10) ** -25


def test_free_energy_deterministic():
    c1 = curve_constants(complex(0, 2), 25)
    c2 = curve_constants(complex(0, 2), 25)
    assert free_energy(2, run_to_level(3, c1)) == free_energy(2, run_to_level(3, c2))


def test_free_energy_requires_genus_two(exact_table):
    with pytest.raises(ValueError):
        free_energy(1, exact_table)


def test_recursion_error_is_arithmetic():
    assert issubclass(RecursionError, ArithmeticError)
