from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from wtr import _kernels_py as py
from wtr import kernels

compiled = pytest.importorskip("wtr._kernels")

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=20).map(lambda f: mpq(f.numerator, f.denominator))


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@settings(max_examples=40, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=8), st.lists(rationals, min_size=1, max_size=8), st.integers(0, 12))
def test_cauchy_product_agrees(a, b, n):
    assert compiled.cauchy_product(a, b, n) == py.cauchy_product(a, b, n)


@settings(max_examples=40, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=8), st.integers(0, 10))
def test_series_inverse_agrees(a, n):
    a[0] = a[0] or mpq(1)
    inv = 1 / a[0]
    got = compiled.series_inverse(a, n, inv)
    assert got == py.series_inverse(a, n, inv)
    if n:
        # the product with the input truncates to 1
        assert py.cauchy_product(a, got, n) == [1] + [0] * (n - 1)


def test_series_inverse_of_one_minus_t():
    assert py.series_inverse([1, -1], 5, 1) == [1, 1, 1, 1, 1]
    assert py.cauchy_product([Fraction(1, 2), 1], [2], 3) == [1, 2, 0]


@pytest.mark.parametrize("power", [1, 3, 5])
def test_lambert_sum_agrees(power):
    q = 0.05 + 0.1j
    assert abs(compiled.lambert_sum(q, power, 40) - py.lambert_sum(q, power, 40)) < 1e-14


def test_p2_double_agrees():
    tau, z = 0.3 + 1.2j, 0.21 + 0.17j
    assert abs(compiled.p2_double(z, tau, 30) - py.p2_double(z, tau, 30)) < 1e-10
