"""Curve constants, Eisenstein series and numeric evaluation of Weierstrass-type functions.

Numeric evaluation works on the lattice ``scale * (Z + tau Z)``.  Ordinary curves
use ``scale = 1``; the special curve ``y^2 = 4(x^3 - 1)`` is the hexagonal lattice
rescaled so that ``g2 = 0`` and ``g3 = 4`` hold exactly.  Everything is computed
from the normalized coordinate ``u = z / scale`` and then rescaled by the
appropriate weight.

The q-series used for ``P2`` and its derivatives is

    P2^(m)(u) = (2 pi i)^(2+m) [ sum_{k>=0} Li_{-1-m}(q^k x) + (-1)^m sum_{k>=1} Li_{-1-m}(q^k / x) ]

with ``x = exp(2 pi i u)``, ``q = exp(2 pi i tau)`` and ``Li_{-s}`` the
polylogarithm of negative order written through Eulerian polynomials.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import mpmath
from gmpy2 import mpq

from wtr.algebra import CycOmega, GammaField, LaurentSeries

GUARD_DIGITS = 12
DEFAULT_PRECISION = int(os.environ.get("WTR_PRECISION", "60"))

KINDS = ("wp", "wp1", "zeta", "P1", "P2", "P2d")


class ConvergenceError(ValueError):
    pass


class PoleError(ValueError):
    pass


def make_context(prec: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.dps = prec + GUARD_DIGITS
    return ctx


@lru_cache(maxsize=None)
def eulerian(s: int) -> tuple[int, ...]:
    """Coefficients of the Eulerian polynomial ``A_s`` (``Li_{-s}(x) = x A_s(x) / (1-x)^(s+1)``)."""
    if s == 0:
        return (1,)
    prev = eulerian(s - 1)
    out = []
    for k in range(s):
        a = (k + 1) * prev[k] if k < len(prev) else 0
        b = (s - k) * prev[k - 1] if 0 < k <= len(prev) else 0
        out.append(a + b)
    return tuple(out)


def _li_bound_log(s: int, log_r: float) -> float:
    """Upper bound for ``log Li_{-s}(r)``, ``0 < r < 1``, using ``A_s(r) <= s!``."""
    r = math.exp(log_r)
    return log_r + math.lgamma(s + 1) - (s + 1) * math.log1p(-r)


# ---------------------------------------------------------------------------
# Curve data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurveData:
    """Constants of ``y^2 = 4x^3 - g2 x - g3``.

    ``mode`` is ``"numeric"`` (all scalars are mpc in ``ctx``) or ``"exact"``
    (special curve; scalars live in Q(w) and G2 is the symbol ``g``).  An exact
    curve carries a numeric twin in ``numeric`` for evaluation.
    """

    mode: str
    tau: Any
    scale: Any
    prec: int
    ctx: Any
    g2: Any
    g3: Any
    e: tuple
    delta: Any
    G2: Any
    G4: Any
    G6: Any
    half_periods: tuple
    special: bool = False
    numeric: "CurveData | None" = None
    q: Any = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def num(self) -> "CurveData":
        return self if self.numeric is None else self.numeric

    def eps(self):
        return self.ctx.mpf(10) ** (-(self.prec + GUARD_DIGITS - 2))

    def tol(self, slack: int = 20):
        return self.ctx.mpf(10) ** (-(self.prec - slack))

    def to_num(self, x):
        """Numeric value of a scalar of this curve's domain."""
        ctx = self.num.ctx
        if isinstance(x, GammaField):
            return x.evaluate(self.num.G2, ctx)
        if isinstance(x, CycOmega):
            return x.to_complex(ctx)
        if isinstance(x, type(mpq(0))):
            return ctx.mpf(x.numerator) / x.denominator
        return ctx.convert(x)

    def describe(self) -> dict:
        if self.special:
            return {"curve": "special"}
        return {"tau": [mpmath.nstr(self.tau.real, 17), mpmath.nstr(self.tau.imag, 17)]}


def _check_tau(tau):
    if tau.imag <= 0:
        raise ConvergenceError(f"Im tau must be positive, got {tau}")


def lambert_sum(power: int, q, ctx):
    """``sum_{n>=1} n^power q^n / (1 - q^n)`` with a certified geometric tail."""
    aq = float(abs(q))
    if aq >= 1:
        raise ConvergenceError("|q| >= 1")
    if aq == 0:
        return ctx.mpc(0) if abs(q) == 0 else q / (1 - q)
    eps = float(ctx.mpf(10) ** (-ctx.dps))
    acc = ctx.mpc(0)
    qn = ctx.mpc(1)
    n = 0
    while True:
        n += 1
        qn *= q
        acc += n**power * qn / (1 - qn)
        # remaining terms are bounded by sum_{m>n} m^p |q|^m / (1-|q|)
        nxt = n + 1
        if nxt**power * aq**nxt / (1 - aq) ** (power + 2) < eps:
            break
    return acc


def _eisenstein_std(tau, ctx):
    """``(G2, G4, G6)`` on the lattice ``Z + tau Z``."""
    _check_tau(tau)
    q = ctx.expjpi(2 * tau)
    pi = ctx.pi
    g2 = pi**2 / 3 * (1 - 24 * lambert_sum(1, q, ctx))
    g4 = pi**4 / 45 * (1 + 240 * lambert_sum(3, q, ctx))
    g6 = 2 * pi**6 / 945 * (1 - 504 * lambert_sum(5, q, ctx))
    return g2, g4, g6


def _div(x, n: int):
    """``x / n`` that stays exact for integer and rational ``x``."""
    if isinstance(x, int):
        return mpq(x, n)
    return x / n


def eisenstein_higher(G4, G6, kmax: int) -> list:
    """``[G4, G6, G8, ..., G_{2 kmax}]`` from the quadratic recurrence for ``c_k = (2k+1) G_{2k+2}``."""
    c = {1: 3 * G4, 2: 5 * G6}
    for k in range(3, kmax):
        s = 0
        for m in range(1, k - 1):
            s = s + c[m] * c[k - 1 - m]
        c[k] = _div(3 * s, (2 * k + 3) * (k - 2))
    out = []
    for k in range(1, kmax):
        out.append(_div(c[k], 2 * k + 1))
    return out


def eisenstein(weight: int, curve: CurveData):
    """``G_weight`` of the curve's lattice."""
    if weight < 2 or weight % 2:
        raise ValueError("weight must be even and >= 2")
    if weight == 2:
        return curve.G2
    if weight == 4:
        return curve.G4
    if weight == 6:
        return curve.G6
    return eisenstein_higher(curve.G4, curve.G6, weight // 2)[-1]


def _numeric_curve(tau, prec: int, scale=None, special=False) -> CurveData:
    ctx = make_context(prec)
    tau = ctx.mpc(tau)
    _check_tau(tau)
    lam = ctx.mpf(1) if scale is None else ctx.mpf(scale)
    G2s, G4s, G6s = _eisenstein_std(tau, ctx)
    G2, G4, G6 = G2s / lam**2, G4s / lam**4, G6s / lam**6
    g2, g3 = 60 * G4, 140 * G6
    q = ctx.expjpi(2 * tau)
    hp = (lam / 2, lam * tau / 2, -lam * (1 + tau) / 2)
    proto = CurveData(
        mode="numeric", tau=tau, scale=lam, prec=prec, ctx=ctx, g2=g2, g3=g3, e=(), delta=None,
        G2=G2, G4=G4, G6=G6, half_periods=hp, special=special, q=q,
    )
    e = tuple(p_eval("wp", h, proto) for h in hp)
    if special:
        # Pin the algebraic constants to their exact values.
        w = CycOmega.w()
        roots = {1: ctx.mpc(1), 2: w.to_complex(ctx), 3: (w * w).to_complex(ctx)}
        pinned = []
        for ei in e:
            best = min(roots.values(), key=lambda r: abs(r - ei))
            if abs(best - ei) > ctx.mpf(10) ** (-(prec - 5)):
                raise ConvergenceError("special-curve branch values do not match the roots of unity")
            pinned.append(best)
        e = tuple(pinned)
        g2, g3, G4, G6 = ctx.mpc(0), ctx.mpc(4), ctx.mpc(0), ctx.mpf(1) / 35
    delta = g2**3 - 27 * g3**2
    curve = CurveData(
        mode="numeric", tau=tau, scale=lam, prec=prec, ctx=ctx, g2=g2, g3=g3, e=e, delta=delta,
        G2=G2, G4=G4, G6=G6, half_periods=hp, special=special, q=q,
    )
    _validate(curve)
    return curve


def _validate(curve: CurveData):
    ctx = curve.ctx
    e1, e2, e3 = curve.e
    tol = ctx.mpf(10) ** (-(curve.prec - 5))
    scale = 1 + abs(curve.g2) + abs(curve.g3)
    checks = [
        e1 + e2 + e3,
        (e1 * e2 + e2 * e3 + e3 * e1 + curve.g2 / 4),
        (e1 * e2 * e3 - curve.g3 / 4),
        (curve.delta - 16 * ((e1 - e2) * (e2 - e3) * (e3 - e1)) ** 2) / (1 + abs(curve.delta)),
    ]
    for c in checks:
        if abs(c) > tol * scale:
            raise ConvergenceError(f"branch-value mismatch {mpmath.nstr(c, 5)}")


def special_scale(prec: int):
    """Real ``lam > 0`` with ``g3(lam (Z + tau0 Z)) = 4`` where ``tau0 = exp(2 pi i / 3)``."""
    ctx = make_context(prec)
    tau0 = ctx.expjpi(ctx.mpf(2) / 3)
    _, _, G6 = _eisenstein_std(tau0, ctx)
    g3 = 140 * G6
    return ctx.root(g3.real / 4, 6)


SPECIAL_E = (CycOmega(1), CycOmega(0, 1), CycOmega(-1, -1))


def curve_constants(spec="special", prec: int = DEFAULT_PRECISION, mode: str | None = None) -> CurveData:
    """Build a curve from ``"special"`` or a modulus ``tau``.

    ``mode`` defaults to ``"exact"`` for the special curve and ``"numeric"``
    otherwise.  ``curve_constants("special", mode="numeric")`` returns the
    numeric twin directly.
    """
    if isinstance(spec, str):
        if spec != "special":
            raise ValueError(f"unknown curve spec {spec!r}")
        mode = mode or "exact"
        ctx = make_context(prec)
        tau0 = ctx.expjpi(ctx.mpf(2) / 3)
        lam = special_scale(prec)
        num = _numeric_curve(tau0, prec, scale=lam, special=True)
        if mode == "numeric":
            return num
        e = tuple(_match_special_e(num))
        return CurveData(
            mode="exact", tau=num.tau, scale=lam, prec=prec, ctx=num.ctx,
            g2=mpq(0), g3=mpq(4), e=e, delta=mpq(-432),
            G2=GammaField.gamma(), G4=mpq(0), G6=mpq(1, 35),
            half_periods=num.half_periods, special=True, numeric=num, q=num.q,
        )
    if mode == "exact":
        raise ValueError("exact mode is only available on the special curve")
    return _numeric_curve(spec, prec)


def _match_special_e(num: CurveData):
    ctx = num.ctx
    out = []
    for ei in num.e:
        out.append(min(SPECIAL_E, key=lambda c: abs(c.to_complex(ctx) - ei)))
    if len(set(map(repr, out))) != 3:
        raise ConvergenceError("could not match the special branch values")
    return out


# ---------------------------------------------------------------------------
# q-series evaluation
# ---------------------------------------------------------------------------


def _reduce(u, curve: CurveData):
    """Return ``(u_red, n)`` with ``u = u_red + n tau + integer`` and ``|Im u_red| <= Im tau / 2``."""
    ctx = curve.ctx
    tau = curve.tau
    n = int(ctx.nint(u.imag / tau.imag))
    u = u - n * tau
    k = int(ctx.nint(u.real))
    return u - k, n


def _li_terms(x, smax: int, ctx):
    """``[Li_{-s}(x) for s in 0..smax]``."""
    inv = 1 / (1 - x)
    out = []
    p = x * inv
    for s in range(smax + 1):
        coeffs = eulerian(s)
        acc = ctx.mpc(coeffs[-1])
        for c in reversed(coeffs[:-1]):
            acc = acc * x + c
        out.append(acc * p)
        p *= inv
    return out


def _std_sums(u, mmax: int, curve: CurveData, with_p1: bool):
    """Lattice ``Z + tau Z`` values of ``P2^(m)(u)`` for ``m <= mmax`` and optionally ``P1(u)``.

    ``u`` must already be reduced.
    """
    ctx = curve.ctx
    twopii = 2j * ctx.pi
    x = ctx.expjpi(2 * u)
    if abs(1 - x) < ctx.mpf(10) ** (-(curve.prec // 3)):
        raise PoleError("evaluation point too close to a lattice point")
    q = curve.q
    log_aq = -2 * math.pi * float(curve.tau.imag)
    aq = math.exp(log_aq)
    smax = mmax + 1
    lo = 0 if with_p1 else 1
    plus = [ctx.mpc(0)] * (smax + 1)
    minus = [ctx.mpc(0)] * (smax + 1)
    for s, v in enumerate(_li_terms(x, smax, ctx)):
        plus[s] += v
    log_R = abs(2 * math.pi * float(u.imag))
    log_eps = -(curve.prec + GUARD_DIGITS) * math.log(10)
    qk = ctx.mpc(1)
    k = 0
    while True:
        k += 1
        qk *= q
        tp = _li_terms(qk * x, smax, ctx)
        tm = _li_terms(qk / x, smax, ctx)
        for s in range(lo, smax + 1):
            plus[s] += tp[s]
            minus[s] += tm[s]
        log_r = (k + 1) * log_aq + log_R
        if log_r < -0.7:
            bound = max(_li_bound_log(s, log_r) for s in range(lo, smax + 1)) - math.log1p(-aq) + math.log(2)
            if bound < log_eps:
                break
        if k > 100000:
            raise ConvergenceError("q-series did not converge")
    vals = []
    fac = twopii * twopii
    for m in range(mmax + 1):
        s = m + 1
        sign = 1 if m % 2 == 0 else -1
        vals.append(fac * (plus[s] + sign * minus[s]))
        fac *= twopii
    p1 = None
    if with_p1:
        p1 = twopii * (ctx.mpf(1) / 2 + plus[0] - minus[0])
    return vals, p1


def p2_derivs(z, mmax: int, curve: CurveData) -> list:
    """``[P2^(m)(z) for m in 0..mmax]`` on the curve's lattice."""
    cur = curve.num
    ctx = cur.ctx
    key = ("p2", ctx.mpc(z), mmax)
    hit = cur._cache.get(key)
    if hit is not None:
        return hit
    u, _ = _reduce(ctx.mpc(z) / cur.scale, cur)
    vals, _ = _std_sums(u, mmax, cur, False)
    lam = cur.scale
    out = [v / lam ** (2 + m) for m, v in enumerate(vals)]
    if len(cur._cache) < 50000:
        cur._cache[key] = out
    return out


def p1_eval(z, curve: CurveData):
    cur = curve.num
    ctx = cur.ctx
    u, n = _reduce(ctx.mpc(z) / cur.scale, cur)
    _, p1 = _std_sums(u, 0, cur, True)
    return (p1 + 2j * ctx.pi * n) / cur.scale


def p_eval(kind: str, z, curve: CurveData, m: int = 0):
    """Evaluate ``wp``, ``wp1`` (derivative), ``zeta``, ``P1``, ``P2`` or ``P2d`` (m-th derivative of P2)."""
    cur = curve.num
    if kind == "wp":
        return p2_derivs(z, 0, cur)[0] - cur.G2
    if kind == "wp1":
        return p2_derivs(z, 1, cur)[1]
    if kind == "P2":
        return p2_derivs(z, 0, cur)[0]
    if kind == "P2d":
        return p2_derivs(z, m, cur)[m]
    if kind == "P1":
        return p1_eval(z, cur)
    if kind == "zeta":
        return -p1_eval(z, cur) + cur.G2 * cur.ctx.mpc(z)
    raise ValueError(f"unknown kind {kind!r}")


def theta_deriv(d: int, u, curve: CurveData):
    """``d``-th derivative in ``u`` of ``theta(u|tau) = sum_n exp(i pi (n+1/2)^2 tau + 2 pi i (u+1/2)(n+1/2))``.

    ``u`` is the normalized coordinate (``z / scale``).
    """
    cur = curve.num
    ctx = cur.ctx
    tau = cur.tau
    u = ctx.mpc(u)
    log_eps = -(cur.prec + GUARD_DIGITS + 5) * math.log(10)
    acc = ctx.mpc(0)
    twopii = 2j * ctx.pi
    n = 0
    quiet = 0
    # sum n = 0, -1, 1, -2, ... symmetric in (n + 1/2)
    while True:
        for nn in ((n, -n - 1)):
            h = ctx.mpf(2 * nn + 1) / 2
            expo = 1j * ctx.pi * h * h * tau + twopii * (u + ctx.mpf(1) / 2) * h
            acc += (twopii * h) ** d * ctx.exp(expo)
        h = float(n + 0.5)
        mag = -math.pi * float(tau.imag) * h * h + 2 * math.pi * abs(float(u.imag)) * h + d * math.log(2 * math.pi * h + 1)
        if mag < log_eps and h > abs(float(u.imag)) / float(tau.imag) + 1:
            quiet += 1
            if quiet > 2:
                break
        n += 1
    return acc


# ---------------------------------------------------------------------------
# Local expansions
# ---------------------------------------------------------------------------


def wp_expand_at_zero(order: int, curve: CurveData) -> LaurentSeries:
    """``wp(t) = t^-2 + sum_{k>=1} (2k+1) G_{2k+2} t^(2k) + O(t^order)``."""
    if order < 3:
        raise ValueError("order must be at least 3")
    key = ("wp0", order)
    hit = curve._cache.get(key)
    if hit is not None:
        return hit
    kmax = max(order // 2 + 1, 3)
    Gs = eisenstein_higher(curve.G4, curve.G6, kmax + 1)
    coeffs = [0] * (order + 2)
    coeffs[0] = 1
    for k in range(1, kmax + 1):
        e = 2 * k
        if e < order:
            coeffs[e + 2] = (2 * k + 1) * Gs[k - 1]
    out = LaurentSeries.make(0, -2, coeffs, order)
    curve._cache[key] = out
    return out


def _ode_taylor(b0, b1, g2, order: int) -> list:
    """Taylor coefficients of the solution of ``f'' = 6 f^2 - g2/2`` with ``f(0)=b0``, ``f'(0)=b1``."""
    b = [b0, b1]
    for j in range(order - 2):
        s = 0
        for i in range(j + 1):
            s = s + b[i] * b[j - i]
        s = 6 * s
        if j == 0:
            s = s - _div(g2, 2)
        b.append(_div(s, (j + 2) * (j + 1)))
    return b[:order]


def wp_expand_at_halfperiod(a: int, order: int, curve: CurveData) -> LaurentSeries:
    """``wp(omega_a + t)`` as a Taylor series; ``a`` in ``{1, 2, 3}``."""
    if order < 4:
        raise ValueError("order must be at least 4")
    key = ("wph", a, order)
    hit = curve._cache.get(key)
    if hit is not None:
        return hit
    b = _ode_taylor(curve.e[a - 1], 0, curve.g2, order)
    out = LaurentSeries.make(a, 0, b, order)
    curve._cache[key] = out
    return out


def wp_taylor_at(p, order: int, curve: CurveData) -> LaurentSeries:
    """Taylor series of ``wp(p + t)`` seeded with q-series values of ``wp(p)`` and ``wp'(p)``."""
    cur = curve.num
    ctx = cur.ctx
    p = ctx.mpc(p)
    for lp in _nearby_special_points(p, cur):
        if abs(p - lp) < ctx.mpf(10) ** (-(cur.prec // 4)):
            raise PoleError("seed point too close to a lattice point or half-period")
    vals = p2_derivs(p, 1, cur)
    b = _ode_taylor(vals[0] - cur.G2, vals[1], cur.g2, order)
    return LaurentSeries.make(p, 0, b, order)


def _nearby_special_points(p, curve: CurveData):
    ctx = curve.ctx
    u, _ = _reduce(p / curve.scale, curve)
    base = p - u * curve.scale
    for h in (0, ctx.mpf(1) / 2, curve.tau / 2, (1 + curve.tau) / 2):
        for s in (-1, 0, 1):
            for r in (-1, 0, 1):
                yield base + (h + s + r * curve.tau) * curve.scale


def p2_local(c: int, m: int, order: int, curve: CurveData) -> LaurentSeries:
    """Expansion in ``t`` of ``P2^(m)(omega_c + t)``; ``c = 0`` is the origin.

    Truncated at ``t^order``.
    """
    key = ("p2loc", c, m, order)
    hit = curve._cache.get(key)
    if hit is not None:
        return hit
    from wtr.algebra import laurent_diff

    if c == 0:
        s = wp_expand_at_zero(max(order + m, 3), curve)
    else:
        s = wp_expand_at_halfperiod(c, max(order + m, 4), curve)
    s = s + LaurentSeries.monomial(s.point, curve.G2, 0, s.trunc)
    for _ in range(m):
        s = laurent_diff(s)
    s = s.truncate(order)
    curve._cache[key] = s
    return s


def half_period_sum(a: int, b: int) -> int:
    """Index of ``omega_a - omega_b`` modulo the lattice (0 for the origin)."""
    if a == b:
        return 0
    if a == 0:
        return b
    if b == 0:
        return a
    return 6 - a - b


def g2_transform_residual(tau, prec: int = 30):
    """``G2(-1/tau) - tau^2 G2(tau) + 2 pi i tau``."""
    ctx = make_context(prec)
    tau = ctx.mpc(tau)
    a = _eisenstein_std(-1 / tau, ctx)[0]
    b = _eisenstein_std(tau, ctx)[0]
    return a - tau**2 * b + 2j * ctx.pi * tau
