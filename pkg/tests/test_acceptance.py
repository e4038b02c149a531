"""Acceptance criteria 1-8; each test prints one ``criterion N: PASS|FAIL`` line.

Run alone with ``pytest -s tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest

from golden import GOLDEN, golden_basis, golden_value
from wtr.basis import DoubleCurve, a_period_quadrature, multi_eval
from wtr.elliptic import curve_constants
from wtr.identities import (
    check_basic_periods,
    check_ellint_period,
    check_identity_tower,
    basic_period_closed_forms,
    ellint_period,
    sample_points,
)
from wtr.nonperturbative import closed_form_xderiv, quantum_curve_report, s_np_xderivs, special_setup
from wtr.recursion import run_to_level
from wtr.wavefunction import operator_check_A, operator_check_B

pytestmark = pytest.mark.slow

TAUS = [complex(0, 2), complex(0.3, 1.2), complex(-0.4, 0.9)]
TOWER = [(1, 0), (0, 2), (1, 1), (0, 3), (2, 0), (1, 2), (0, 4)]
TESTS = Path(__file__).parent


def _announce(capsys, number, ok, started, detail=""):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - started:.1f}s) {detail}".rstrip()
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def _worst(values):
    return max(values, default=mpmath.mpf(0))


def test_criterion_1_golden_exact(capsys):
    t0 = time.perf_counter()
    table = run_to_level(2, curve_constants("special", 30, mode="exact"))
    bad = [key for key in GOLDEN if table.W[key].terms != golden_basis(key, table.curve)]
    ok = not bad and time.perf_counter() - t0 < 60
    assert _announce(capsys, 1, ok, t0, f"mismatches={bad}")


def test_criterion_2_golden_numeric(capsys):
    t0 = time.perf_counter()
    worst = mpmath.mpf(0)
    for tau in TAUS:
        table = run_to_level(2, curve_constants(tau, 60))
        c = table.curve
        for key in GOLDEN:
            for zs in sample_points(c, 3, key[1], seed=7):
                got = multi_eval(table.W[key], zs, c)
                ref = golden_value(key, zs, c)
                worst = max(worst, abs(got - ref) / abs(ref))
    ok = worst < mpmath.mpf(10) ** -30 and time.perf_counter() - t0 < 300
    assert _announce(capsys, 2, ok, t0, f"max_rel={mpmath.nstr(worst, 3)}")


def test_criterion_3_elliptic_period(capsys):
    t0 = time.perf_counter()
    worst = mpmath.mpf(0)
    quad = 0.0
    for tau in TAUS:
        worst = max(worst, check_ellint_period(curve_constants(tau, 60)).max_rel)
        d = DoubleCurve.from_tau(tau)
        q = a_period_quadrature(lambda z: d.P2(2 * z) / d.wp1_sq(z), tau)
        quad = max(quad, abs(q - complex(ellint_period(curve_constants(tau, 16)))))
    ok = worst < mpmath.mpf(10) ** -40 and quad < 1e-10 and time.perf_counter() - t0 < 60
    assert _announce(capsys, 3, ok, t0, f"max_rel={mpmath.nstr(worst, 3)} quadrature={quad:.2e}")


def test_criterion_4_three_periods(capsys):
    t0 = time.perf_counter()
    worst = mpmath.mpf(0)
    quad = 0.0
    for tau in TAUS:
        worst = max(worst, check_basic_periods(curve_constants(tau, 60)).max_rel)
        c16 = curve_constants(tau, 16)
        ref = basic_period_closed_forms(c16)
        d = DoubleCurve.from_tau(tau)
        integrands = {"inv_wp1_sq": lambda z: 1 / d.wp1_sq(z), "wp_over_wp1_sq": lambda z: d.wp(z) / d.wp1_sq(z), "wp": d.wp}
        for key, f in integrands.items():
            quad = max(quad, abs(a_period_quadrature(f, tau) - complex(c16.to_num(ref[key]))))
    ok = worst < mpmath.mpf(10) ** -40 and quad < 1e-10 and time.perf_counter() - t0 < 60
    assert _announce(capsys, 4, ok, t0, f"max_rel={mpmath.nstr(worst, 3)} quadrature={quad:.2e}")


def test_criterion_5_identity_tower(capsys):
    t0 = time.perf_counter()
    worst = mpmath.mpf(0)
    for tau in TAUS:
        table = run_to_level(3, curve_constants(tau, 60))
        for g, n in TOWER:
            worst = max(worst, check_identity_tower(g, n, table, count=5, seed=5).max_abs)
    ok = worst < mpmath.mpf(10) ** -30 and time.perf_counter() - t0 < 600
    assert _announce(capsys, 5, ok, t0, f"max_abs={mpmath.nstr(worst, 3)}")


def test_criterion_6_operators(capsys):
    t0 = time.perf_counter()
    worst = gap = mpmath.mpf(0)
    for tau in TAUS:
        table = run_to_level(4, curve_constants(tau, 60))
        zs = [s[0] for s in sample_points(table.curve, 5, 1, seed=11)]
        ra = operator_check_A(5, zs, table)
        rb = operator_check_B(5, zs, table)
        worst = max(worst, _worst(abs(r.value) for r in ra + rb))
        gap = max(gap, _worst(abs(a.value - b.value) for a, b in zip(ra, rb)))
    tol = mpmath.mpf(10) ** -35
    ok = worst < tol and gap < tol and time.perf_counter() - t0 < 900
    assert _announce(capsys, 6, ok, t0, f"max_residual={mpmath.nstr(worst, 3)} max_gap={mpmath.nstr(gap, 3)}")


def test_criterion_7_quantum_curve(capsys):
    t0 = time.perf_counter()
    table, theta = special_setup(60, 3)
    c = table.curve
    pts = [s[0] for s in sample_points(c, 10, 1, seed=3)]
    rep, system, rats = quantum_curve_report(5, table, theta, pts[:7], pts[7:], tol=mpmath.mpf(10) ** -25)
    want = {("A", 4, 0): Fraction(1, 576), ("B", 2, 1): Fraction(1, 12), ("B", 4, 2): Fraction(1, 6912)}
    exact = all(rats[k] == want.get(k, Fraction(0)) for k in rats)
    closed = mpmath.mpf(0)
    for k in (2, 3, 4):
        for z in [s[0] for s in sample_points(c, 5, 1, seed=19)]:
            closed = max(closed, abs(s_np_xderivs(k, z, table, theta)[0] - closed_form_xderiv(k, z, c)))
    fit = system.max_residual()
    ok = (rep.passed and exact and fit < mpmath.mpf(10) ** -25 and closed < mpmath.mpf(10) ** -25
          and time.perf_counter() - t0 < 1800)
    found = {f"{k[0]}{k[1]}[x^{k[2]}]": str(v) for k, v in rats.items() if v}
    assert _announce(capsys, 7, ok, t0, f"nonzero={found} fit={mpmath.nstr(fit, 3)} closed={mpmath.nstr(closed, 3)}")


PROPERTY_SUITES = [
    str(TESTS / "test_algebra.py"),
    "-k",
    "algebra or symmetry or alpha or zero_a_period or free_energy or finite_difference or central_differences"
    " or derivative or closed_forms",
    str(TESTS / "test_recursion.py"),
    str(TESTS / "test_basis.py"),
    str(TESTS / "test_elliptic.py"),
    str(TESTS / "test_wavefunction.py"),
    str(TESTS / "test_nonperturbative.py"),
]


def test_criterion_8_property_suites(capsys):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_SUITES],
                          capture_output=True, text=True, cwd=TESTS.parent)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    ok = proc.returncode == 0 and time.perf_counter() - t0 < 600
    assert _announce(capsys, 8, ok, t0, tail)


if __name__ == "__main__":
    results = []
    for name, fn in sorted((k, v) for k, v in dict(globals()).items() if k.startswith("test_criterion_")):
        try:
            fn(None)
            results.append(True)
        except AssertionError:
            results.append(False)
    sys.exit(0 if all(results) else 1)
