"""Elliptic functions in the canonical form ``c0 + sum c_{p,m} P2^(m)(z - p)``.

Poles are either symbolic ramification points (``0`` for the origin, ``1, 2, 3``
for the half-periods) or numeric points.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Callable

from gmpy2 import mpq

from wtr import kernels
from wtr.algebra import LaurentSeries, laurent_diff
from wtr.elliptic import (
    CurveData,
    PoleError,
    half_period_sum,
    lambert_sum,
    p2_derivs,
    p2_local,
    p_eval,
    wp_taylor_at,
)


class ReductionError(ValueError):
    pass


def _fact(n: int) -> int:
    return math.factorial(n)


def _is_symbolic(p) -> bool:
    return isinstance(p, int)


def pole_point(p, curve: CurveData):
    """Numeric location of a pole."""
    cur = curve.num
    if _is_symbolic(p):
        return cur.ctx.mpc(0) if p == 0 else cur.half_periods[p - 1]
    return cur.ctx.mpc(p)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EllipticExpr:
    c0: Any
    terms: dict = field(default_factory=dict)

    def items(self):
        return self.terms.items()

    def max_order(self, p) -> int:
        ms = [m for (q, m) in self.terms if q == p]
        return max(ms) + 2 if ms else 0

    def poles(self) -> list:
        seen = []
        for (p, _m) in self.terms:
            if p not in seen:
                seen.append(p)
        return seen

    def __add__(self, other: "EllipticExpr") -> "EllipticExpr":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return EllipticExpr(self.c0 + other.c0, {k: v for k, v in terms.items() if v})

    def scale(self, c) -> "EllipticExpr":
        return EllipticExpr(self.c0 * c, {k: v * c for k, v in self.terms.items()})

    def __repr__(self):
        parts = [f"{self.c0}"] + [f"({v})*P2^({m})(z-{p})" for (p, m), v in self.terms.items()]
        return " + ".join(parts)


@dataclass(frozen=True, eq=False)
class QuasiEllipticPrimitive:
    """``lin * z + sum p1[p] P1(z - p) + remainder(z) + const``."""

    lin: Any
    p1_terms: dict
    remainder: EllipticExpr
    const: Any


@dataclass(frozen=True, eq=False)
class MultiExpr:
    """Sum of coefficient times a product of one factor per variable.

    A factor is ``(pole, m)`` for ``P2^(m)(z_j - pole)`` or ``None`` for the
    constant 1.
    """

    n: int
    terms: dict

    def slice_terms(self, j: int):
        """Group the terms by the factor in slot ``j``."""
        out: dict = {}
        for key, c in self.terms.items():
            rest = key[:j] + key[j + 1 :]
            out.setdefault(key[j], {})[rest] = c
        return out

    def permuted(self, perm) -> "MultiExpr":
        return MultiExpr(self.n, {tuple(key[i] for i in perm): c for key, c in self.terms.items()})

    def max_deriv(self) -> int:
        return max((s[1] for key in self.terms for s in key if s is not None), default=0)

    def __repr__(self):
        return f"MultiExpr(n={self.n}, {len(self.terms)} terms)"


# ---------------------------------------------------------------------------
# Local expansions of basis elements
# ---------------------------------------------------------------------------


def _classify_shift(d, curve: CurveData):
    """Return ``c`` in ``{0,1,2,3}`` if ``d`` is a lattice point or half-period, else ``None``."""
    cur = curve.num
    ctx = cur.ctx
    u = ctx.mpc(d) / cur.scale
    tau = cur.tau
    tol = ctx.mpf(10) ** (-(cur.prec // 2))
    for c, h in ((0, 0), (1, ctx.mpf(1) / 2), (2, tau / 2), (3, (1 + tau) / 2)):
        w = u - h
        n = ctx.nint(w.imag / tau.imag)
        w = w - n * tau
        w = w - ctx.nint(w.real)
        if abs(w) < tol:
            return c
    return None


def shifted_p2_series(d, m: int, order: int, curve: CurveData, point=None) -> LaurentSeries:
    """Expansion in ``t`` of ``P2^(m)(d + t)``, where ``d`` is symbolic (0..3) or numeric."""
    if _is_symbolic(d):
        s = p2_local(d, m, order, curve)
    else:
        c = _classify_shift(d, curve)
        if c is not None:
            s = p2_local(c, m, order, curve.num)
        else:
            cur = curve.num
            w = wp_taylor_at(d, order + m + 1, cur)
            s = w + LaurentSeries.monomial(w.point, cur.G2, 0, w.trunc)
            for _ in range(m):
                s = laurent_diff(s)
            s = s.truncate(order)
    if point is not None:
        s = LaurentSeries(point, s.min_exp, s.coeffs, s.trunc)
    return s


def scale_arg(s: LaurentSeries, k: int) -> LaurentSeries:
    """Substitute ``t -> k t``."""
    return LaurentSeries.make(s.point, s.min_exp, [c * k ** (s.min_exp + i) if s.min_exp + i >= 0 else _exact_div(c, k ** -(s.min_exp + i)) for i, c in enumerate(s.coeffs)], s.trunc)


def wp_local(c, order: int, curve: CurveData, point=None) -> LaurentSeries:
    """``wp(c + t)``; ``c`` symbolic or numeric."""
    s = shifted_p2_series(c, 0, order, curve, point=point)
    return s - LaurentSeries.monomial(s.point, curve.G2 if _is_symbolic(c) else curve.num.G2, 0, s.trunc)


def wp1_local(c, order: int, curve: CurveData, point=None) -> LaurentSeries:
    return shifted_p2_series(c, 1, order, curve, point=point)


def term_series_at(q, m: int, p, order: int, curve: CurveData) -> LaurentSeries:
    """Expansion of ``P2^(m)(z - q)`` at ``z = p + t``."""
    if _is_symbolic(p) and _is_symbolic(q):
        d = half_period_sum(p, q)
    else:
        d = pole_point(p, curve) - pole_point(q, curve)
    return shifted_p2_series(d, m, order, curve, point=p)


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------


def regular_points(curve: CurveData):
    cur = curve.num
    ctx = cur.ctx
    yield (1 + cur.tau) / 5 * cur.scale
    yield (1 + cur.tau) / 3 * cur.scale
    yield ctx.mpc("0.2137", "0.0913") * cur.scale + cur.tau * cur.scale * ctx.mpf("0.31")


def _small(x, tol) -> bool:
    if tol is None:
        return not x
    return abs(x) <= tol if not isinstance(x, type(mpq(0))) else x == 0


def reduce_to_basis(
    expansions: dict,
    curve: CurveData,
    value_at: Callable | None = None,
    tol=None,
) -> EllipticExpr:
    """Peel principal parts from local expansions and fix the constant.

    ``expansions`` maps each pole to the Laurent series of ``f`` there.  In
    numeric mode ``value_at(z)`` must evaluate ``f`` and ``tol`` bounds the
    coefficients treated as zero.  In exact mode (``value_at=None``) the
    constant comes from matching constant terms at the first pole.
    """
    terms: dict = {}
    for p, s in expansions.items():
        if s.min_exp >= 0:
            continue
        if s.trunc < 0:
            raise ReductionError(f"expansion at {p!r} not trusted to its pole order")
        if not _small(s[-1], tol):
            raise ReductionError(f"nonzero residue at pole {p!r}: {s[-1]}")
        for j in range(-s.min_exp, 1, -1):
            c = s[-j]
            if _small(c, tol):
                continue
            sign = 1 if j % 2 == 0 else -1
            terms[(p, j - 2)] = _exact_div(c, sign * _fact(j - 1))
    poles = list(expansions)
    if value_at is not None:
        c0 = None
        for z in regular_points(curve):
            try:
                val = value_at(z)
                basis_val = _eval_terms(terms, z, curve)
            except (PoleError, ZeroDivisionError):
                continue
            c0 = val - basis_val
            break
        if c0 is None:
            raise ReductionError("no usable regular point")
    else:
        if not poles:
            raise ReductionError("constant-term matching needs at least one pole expansion")
        p = poles[0]
        s = expansions[p]
        c0 = s[0]
        for (q, m), c in terms.items():
            c0 = c0 - c * term_series_at(q, m, p, 1, curve)[0]
    expr = EllipticExpr(c0, terms)
    _check_remainder(expr, expansions, curve, tol)
    return expr


def _exact_div(c, n: int):
    if isinstance(c, int):
        return mpq(c, n)
    return c / n


def _check_remainder(expr: EllipticExpr, expansions: dict, curve: CurveData, tol):
    """``f - sum terms`` must be the constant ``c0`` at every expanded pole."""
    for p, s in expansions.items():
        top = min(s.trunc, 4)
        if top <= s.min_exp:
            continue
        diff = s
        for (q, m), c in expr.terms.items():
            diff = diff - term_series_at(q, m, p, top, curve).scale(c)
        diff = diff.truncate(top)
        for k in range(diff.min_exp, diff.trunc):
            v = diff[k] - (expr.c0 if k == 0 else 0)
            if tol is None:
                if v:
                    raise ReductionError(f"remainder is not constant at {p!r} (t^{k}: {v})")
            elif abs(curve.to_num(v)) > tol * 1e3:
                raise ReductionError(f"remainder is not constant at {p!r} (t^{k}: {v})")


# ---------------------------------------------------------------------------
# Periods, primitives, evaluation
# ---------------------------------------------------------------------------


def a_period(e: EllipticExpr):
    """A-cycle mean of ``e``: every basis element integrates to zero."""
    return e.c0


def b_period(e: EllipticExpr, curve: CurveData):
    """B-cycle integral ``c0 * scale * tau + (2 pi i / scale) * sum(m = 0 coefficients)``."""
    cur = curve.num
    ctx = cur.ctx
    c0 = curve.to_num(e.c0)
    s = sum((curve.to_num(c) for (p, m), c in e.terms.items() if m == 0), ctx.mpc(0))
    return c0 * cur.scale * cur.tau + 2j * ctx.pi / cur.scale * s


def expr_diff(e: EllipticExpr) -> EllipticExpr:
    return EllipticExpr(0, {(p, m + 1): c for (p, m), c in e.terms.items()})


def _eval_terms(terms: dict, z, curve: CurveData, to_num=None):
    cur = curve.num
    ctx = cur.ctx
    conv = to_num or curve.to_num
    acc = ctx.mpc(0)
    by_pole: dict = {}
    for (p, m), c in terms.items():
        by_pole.setdefault(p, []).append((m, c))
    for p, lst in by_pole.items():
        mmax = max(m for m, _ in lst)
        vals = p2_derivs(ctx.mpc(z) - pole_point(p, curve), mmax, cur)
        for m, c in lst:
            acc += conv(c) * vals[m]
    return acc


def primitive_from_zero(e: EllipticExpr, curve: CurveData) -> QuasiEllipticPrimitive:
    """``F(z) = int_0^z e`` assembled term by term (numeric constants)."""
    cur = curve.num
    ctx = cur.ctx
    p1_terms: dict = {}
    rem: dict = {}
    const = ctx.mpc(0)
    for (p, m), c in e.terms.items():
        if p == 0 or (not _is_symbolic(p) and _classify_shift(p, curve) == 0):
            raise PoleError("primitive from 0 needs an integrand regular at 0")
        cn = curve.to_num(c)
        neg = -pole_point(p, curve)
        if m == 0:
            p1_terms[p] = p1_terms.get(p, 0) + cn
            const -= cn * p_eval("P1", neg, cur)
        else:
            rem[(p, m - 1)] = rem.get((p, m - 1), 0) + cn
            const -= cn * p2_derivs(neg, m - 1, cur)[m - 1]
    return QuasiEllipticPrimitive(curve.to_num(e.c0), p1_terms, EllipticExpr(0, rem), const)


def expr_eval(e, z, curve: CurveData):
    """Evaluate an :class:`EllipticExpr` or :class:`QuasiEllipticPrimitive` at ``z``."""
    cur = curve.num
    ctx = cur.ctx
    z = ctx.mpc(z)
    if isinstance(e, EllipticExpr):
        return curve.to_num(e.c0) + _eval_terms(e.terms, z, curve)
    acc = e.lin * z + e.const + _eval_terms(e.remainder.terms, z, curve, to_num=lambda x: x)
    for p, c in e.p1_terms.items():
        acc += c * p_eval("P1", z - pole_point(p, curve), cur)
    return acc


def multi_eval(w: MultiExpr, zs, curve: CurveData, prims: dict | None = None):
    """Evaluate a :class:`MultiExpr`; slot ``j`` may be replaced by a callable in ``prims``.

    ``prims[j]`` maps a factor ``(pole, m)`` to its value in slot ``j``.
    """
    cur = curve.num
    ctx = cur.ctx
    cache: dict = {}

    def factor(j, s):
        if s is None:
            return 1
        key = (j, s)
        if key not in cache:
            if prims and j in prims:
                cache[key] = prims[j](s)
            else:
                p, m = s
                cache[key] = p2_derivs(ctx.mpc(zs[j]) - pole_point(p, curve), m, cur)[m]
        return cache[key]

    acc = ctx.mpc(0)
    for key, c in w.terms.items():
        prod = curve.to_num(c)
        for j, s in enumerate(key):
            prod = prod * factor(j, s)
        acc += prod
    return acc


def basis_primitive_value(s, z, curve: CurveData):
    """``int_0^z P2^(m)(t - p) dt`` for a factor ``s = (p, m)``."""
    cur = curve.num
    p, m = s
    pt = pole_point(p, curve)
    z = cur.ctx.mpc(z)
    if m == 0:
        return p_eval("P1", z - pt, cur) - p_eval("P1", -pt, cur)
    return p2_derivs(z - pt, m - 1, cur)[m - 1] - p2_derivs(-pt, m - 1, cur)[m - 1]


def basis_b_period(s, curve: CurveData):
    """B-cycle integral of the factor ``P2^(m)(z - p)``."""
    cur = curve.num
    if s is None:
        return cur.scale * cur.tau
    p, m = s
    return 2j * cur.ctx.pi / cur.scale if m == 0 else cur.ctx.mpc(0)


# ---------------------------------------------------------------------------
# Contour quadrature oracle (double precision, independent q-series)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleCurve:
    """Double-precision constants for the quadrature oracle."""

    tau: complex
    G2: complex
    g2: complex
    g3: complex

    @classmethod
    def from_tau(cls, tau: complex) -> "DoubleCurve":
        q = cmath.exp(2j * math.pi * tau)
        n = 200
        pi = math.pi
        G2 = pi**2 / 3 * (1 - 24 * kernels.lambert_sum(q, 1, n))
        G4 = pi**4 / 45 * (1 + 240 * kernels.lambert_sum(q, 3, n))
        G6 = 2 * pi**6 / 945 * (1 - 504 * kernels.lambert_sum(q, 5, n))
        return cls(complex(tau), G2, 60 * G4, 140 * G6)

    def P2(self, z: complex) -> complex:
        # bring z into the fundamental strip so the q-series converges fast
        n = round(z.imag / self.tau.imag)
        z = z - n * self.tau
        return kernels.p2_double(z, self.tau, 60)

    def wp(self, z: complex) -> complex:
        return self.P2(z) - self.G2

    def wp1_sq(self, z: complex) -> complex:
        w = self.wp(z)
        return 4 * w**3 - self.g2 * w - self.g3


def contour_height(tau) -> float:
    return min(float(complex(tau).imag), 1.0) / 7


def a_period_quadrature(f: Callable[[complex], complex], tau, tol: float = 1e-13, eps: float | None = None) -> complex:
    """``int f(z) dz`` over ``[i eps, 1 + i eps]`` by trapezoid refinement.

    The integrand is periodic, so the trapezoid rule converges geometrically;
    the step is halved (Richardson-style) until two levels agree to ``tol``.
    """
    if eps is None:
        eps = contour_height(tau)
    n = 16
    prev = None
    vals = [f(complex(k / n, eps)) for k in range(n)]
    total = sum(vals)
    while True:
        est = total / n
        if prev is not None and abs(est - prev) < tol * max(1.0, abs(est)):
            return est
        prev = est
        total += sum(f(complex((2 * k + 1) / (2 * n), eps)) for k in range(n))
        n *= 2
        if n > 1 << 16:
            return est
