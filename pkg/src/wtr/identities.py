"""Verifiers for the loop equations, the identity tower and the period integrals.

Conventions used throughout: a correlator ``W_{g,n}`` is handled as the
coefficient ``w_{g,n}`` of ``dz_1 ... dz_n``, normalised to the literal residue
orientation whatever orientation the table was built with.  Inside ``R2W`` and
the loop equations a slot evaluated at ``-u`` contributes ``w(..., -u, ...)``
times the Jacobian ``-1``; the identity tower uses the plain values
``w(..., -u, ...)``.  Checks with free spectator variables are evaluated at
seeded random sample points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from gmpy2 import mpq

from wtr.algebra import CycOmega, GammaField, LaurentSeries, laurent_mul
from wtr.basis import (
    a_period,
    multi_eval,
    pole_point,
    reduce_to_basis,
    regular_points,
    scale_arg,
    _eval_terms,
)
from wtr.elliptic import CurveData, p2_derivs, p2_local, p_eval
from wtr.recursion import (
    RESIDUE_POINTS,
    CorrelationTable,
    assemble_r2w,
    inverse_kernel_denominator,
    is_stable,
)

__all__ = [
    "CheckReport",
    "sample_points",
    "w_value",
    "w_slot_derivative",
    "r2w_value",
    "q2_value",
    "b_loop_integral",
    "b_loop_value",
    "identity_rhs",
    "loop_equation_residual",
    "literal_sign",
    "curve_relation_residual",
    "check_pole_locations",
    "check_loop_equation",
    "check_identity_tower",
    "check_ellint_period",
    "check_basic_periods",
    "ellint_closed_form",
]


@dataclass
class CheckReport:
    """Outcome of one verification."""

    name: str
    mode: str
    inputs: dict
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    max_abs: float = 0.0
    max_rel: float = 0.0
    tol: float = 0.0
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mode": self.mode,
            "inputs": self.inputs,
            "left": [_fmt(v) for v in self.left],
            "right": [_fmt(v) for v in self.right],
            "max_abs": _fmt(self.max_abs),
            "max_rel": _fmt(self.max_rel),
            "tol": _fmt(self.tol),
            "passed": self.passed,
        }


def _fmt(v):
    if isinstance(v, (bool, int, str)):
        return v
    try:
        import mpmath

        c = mpmath.mpc(v)
        if c.imag == 0:
            return mpmath.nstr(c.real, 20)
        return [mpmath.nstr(c.real, 20), mpmath.nstr(c.imag, 20)]
    except (TypeError, ValueError):
        return str(v)


def _red_tol(curve: CurveData):
    return curve.num.ctx.mpf(10) ** (-(curve.prec - 5))


def default_tol(curve: CurveData):
    """Pass threshold ``10^(20 - prec)``."""
    return curve.num.ctx.mpf(10) ** (20 - curve.prec)


def _is_exact(v) -> bool:
    return isinstance(v, (int, type(mpq(0)), CycOmega, GammaField))


def _report(name, curve, inputs, left, right, tol=None) -> CheckReport:
    if curve.exact and all(_is_exact(v) for v in left + right):
        ok = all(a == b for a, b in zip(left, right))
        return CheckReport(name, "exact", inputs, left, right, 0 if ok else 1, 0 if ok else 1, 0, ok)
    ctx = curve.num.ctx
    tol = default_tol(curve) if tol is None else tol
    mabs = ctx.mpf(0)
    mrel = ctx.mpf(0)
    for a, b in zip(left, right):
        a, b = curve.to_num(a), curve.to_num(b)
        d = abs(a - b)
        mabs = max(mabs, d)
        mrel = max(mrel, d / max(abs(a), abs(b), ctx.mpf(1)))
    return CheckReport(name, "numeric", inputs, left, right, mabs, mrel, tol, bool(mrel <= tol))


# ---------------------------------------------------------------------------
# Sample points
# ---------------------------------------------------------------------------


class Lcg:
    """64-bit linear congruential generator (MMIX constants), uniform doubles from the top 53 bits."""

    A = 6364136223846793005
    C = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = (seed * 0x9E3779B97F4A7C15 + 1) & self.MASK

    def random(self) -> float:
        self.state = (self.A * self.state + self.C) & self.MASK
        return (self.state >> 11) / float(1 << 53)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()


def sample_points(curve: CurveData, count: int, size: int, seed: int = 0) -> list:
    """``count`` tuples of ``size`` generic points in the fundamental domain.

    Imaginary parts lie in ``SAMPLE_IM_RANGE * Im(tau)`` (times the lattice
    scale), away from the half-periods, the A-cycle contour and each other.
    """
    cur = curve.num
    ctx = cur.ctx
    rng = Lcg(seed)
    out = []
    while len(out) < count:
        pts = []
        while len(pts) < size:
            x = rng.uniform(0.05, 0.95)
            y = rng.uniform(*SAMPLE_IM_RANGE)
            u = (ctx.mpf(x) + cur.tau * ctx.mpf(y)) * cur.scale
            if any(abs(u - p) < 0.05 * abs(cur.scale) or abs(u + p) < 0.05 * abs(cur.scale) for p in pts):
                continue
            pts.append(u)
        out.append(pts)
    return out


# ---------------------------------------------------------------------------
# Pointwise correlators
# ---------------------------------------------------------------------------


def literal_sign(table: CorrelationTable, g: int, n: int) -> int:
    """Factor taking the stored ``W_{g,n}`` to the literal residue orientation."""
    if not is_stable(g, n):
        return 1
    return table.orientation ** (2 * g - 2 + n)


def w_value(table: CorrelationTable, g: int, n: int, us):
    """Coefficient of ``dz_1...dz_n`` in ``W_{g,n}`` at the points ``us``."""
    cur = table.curve.num
    if (g, n) == (0, 1):
        return p_eval("wp1", us[0], cur) ** 2
    if (g, n) == (0, 2):
        return p_eval("P2", us[0] - us[1], cur)
    return literal_sign(table, g, n) * multi_eval(table.W[(g, n)], list(us), table.curve)


def w_slot_derivative(table: CorrelationTable, g: int, n: int, us):
    """Derivative of ``w_{g,n}`` in its first argument."""
    curve = table.curve
    cur = curve.num
    if (g, n) == (0, 1):
        return 2 * p_eval("wp1", us[0], cur) * p_eval("P2d", us[0], cur, 2)
    if (g, n) == (0, 2):
        return p_eval("P2d", us[0] - us[1], cur, 1)
    u0 = cur.ctx.mpc(us[0])

    def bump(s):
        p, m = s
        return p2_derivs(u0 - pole_point(p, curve), m + 1, cur)[m + 1]

    return literal_sign(table, g, n) * multi_eval(table.W[(g, n)], list(us), curve, prims={0: bump})


def _form(table, g, n, slots):
    """``w`` at signed points, including the Jacobian of every flipped slot."""
    us = [s * u for u, s in slots]
    sign = 1
    for _, s in slots:
        sign *= s
    return sign * w_value(table, g, n, us)


def _splits(g: int, spect):
    idx = list(range(len(spect)))
    for g1 in range(g + 1):
        for r in range(len(idx) + 1):
            for I in itertools.combinations(idx, r):
                J = [j for j in idx if j not in I]
                yield g1, g - g1, [spect[i] for i in I], [spect[j] for j in J]


def _two_point_sum(table, g, n, z, zs, include_unstable: bool):
    tot = 0
    if g >= 1:
        tot += _form(table, g - 1, n + 2, [(z, 1), (z, -1)] + [(u, 1) for u in zs])
    for g1, g2, I, J in _splits(g, zs):
        if not include_unstable and ((g1, len(I)) == (0, 0) or (g2, len(J)) == (0, 0)):
            continue
        a = _form(table, g1, len(I) + 1, [(z, 1)] + [(u, 1) for u in I])
        b = _form(table, g2, len(J) + 1, [(z, -1)] + [(u, 1) for u in J])
        tot += a * b
    return tot


def r2w_value(table: CorrelationTable, g: int, n: int, z, zs):
    """Coefficient ``f`` with ``R2W_{g,n+1}(z,-z; zs) = f dz^2 prod dz_j``."""
    return _two_point_sum(table, g, n, z, zs, include_unstable=False)


def q2_value(table: CorrelationTable, g: int, n: int, z, zs):
    """``Q2_{g,n+1}(z; zs) / dz^2``: the same sum with the ``W_{0,1}`` terms kept."""
    return _two_point_sum(table, g, n, z, zs, include_unstable=True)


# ---------------------------------------------------------------------------
# The A-period of the recursion integrand
# ---------------------------------------------------------------------------


def _contract(series_by_key: dict, zs, curve: CurveData, trunc: int, point):
    """Evaluate the spectator factors of a tensor series numerically."""
    cur = curve.num
    ctx = cur.ctx
    acc = None
    for key, s in series_by_key.items():
        coef = ctx.mpc(1)
        for j, f in enumerate(key):
            if f is not None:
                coef *= p2_derivs(ctx.mpc(zs[j]) - pole_point(f[0], curve), f[1], cur)[f[1]]
        s = LaurentSeries(point, s.min_exp, [curve.to_num(c) * coef for c in s.coeffs], s.trunc)
        acc = s if acc is None else acc + s
    return acc


def _integrand_at(g: int, n: int, table: CorrelationTable, a, zs, extra: int = 2):
    """Local series of ``f / (2 wp'^2)`` at the residue point ``a``."""
    curve = table.curve
    f = assemble_r2w(g, n, table, a, extra if a != 0 else 1)
    pole = -f.min_exp() if f.data else 0
    inv = inverse_kernel_denominator(a, pole + extra + 2, curve)
    # every term of R2W sits at level 2g-2+n
    sign = table.orientation ** (2 * g - 2 + n)
    out = {}
    for key, fs in f.data.items():
        out[key] = laurent_mul(fs, inv).scale(sign)
    if zs is None:
        return out
    return _contract(out, zs, curve, extra, a)


def b_loop_integral(g: int, n: int, table: CorrelationTable):
    """``B_{g,n+1}`` for ``n = 0``: the A-period of ``f / (2 wp'^2)``.

    Exact on exact curves.  With spectators the period is quasi-elliptic in
    them; use :func:`b_loop_value` at numeric points.
    """
    if n != 0:
        raise ValueError("with spectator variables use b_loop_value at sample points")
    curve = table.curve
    exps = {}
    for a in RESIDUE_POINTS:
        s = _integrand_at(g, 0, table, a, None, extra=4)[()]
        exps[a] = s
    if curve.exact:
        expr = reduce_to_basis(exps, curve)
    else:
        cur = curve.num

        def value(z):
            return r2w_value(table, g, 0, z, []) / (2 * p_eval("wp1", z, cur) ** 2)

        expr = reduce_to_basis(exps, curve, value, _red_tol(curve))
    return a_period(expr)


def _psi(table, g, n, u, rest):
    """``psi(u) = w_{g,n}(-u, rest) / (2 wp'(u)^2)`` and its derivative."""
    cur = table.curve.num
    d1 = p_eval("wp1", u, cur)
    d2 = p_eval("P2d", u, cur, 2)
    w = w_value(table, g, n, [-u] + list(rest))
    wd = -w_slot_derivative(table, g, n, [-u] + list(rest))
    psi = w / (2 * d1**2)
    dpsi = wd / (2 * d1**2) - w * d2 / d1**3
    return psi, dpsi


def _p1_line_mean(p, curve: CurveData):
    """Integral of ``P1(z - p)`` along the A-contour, divided by the lattice scale.

    In lattice units ``P1`` has no constant Fourier mode for
    ``0 < Im(u) < Im(tau)`` beyond ``pi i``; each strip below adds ``-2 pi i``.
    """
    cur = curve.num
    ctx = cur.ctx
    u = _contour_height(curve) - ctx.mpc(p) / cur.scale
    k = int(ctx.floor(u.imag / cur.tau.imag))
    return (ctx.mpc(0, ctx.pi) + 2j * ctx.pi * k) / cur.scale


CONTOUR_HEIGHT = -0.4
SAMPLE_IM_RANGE = (0.05, 0.3)


def _contour_height(curve: CurveData):
    """Height of the A-contour in lattice units: ``-0.4 Im(tau)``.

    With spectators the integrand has residues at ``+-z_j``, so the contour
    matters.  The identity tower holds on the bottom edge of a fundamental
    domain that contains ``0`` and every ``+-z_j``; spectators with
    ``|Im z_j| < 0.3 Im(tau)`` keep a margin from both the contour and the
    half-periods at ``Im = -Im(tau)/2``.
    """
    cur = curve.num
    ctx = cur.ctx
    return ctx.mpc(0, CONTOUR_HEIGHT * cur.tau.imag)


def b_loop_value(g: int, n: int, table: CorrelationTable, zs):
    """``B_{g,n+1}(zs)``: A-cycle mean of ``f(z; zs) / (2 wp'^2)``.

    The mean is the A-period divided by the lattice scale, taken along the
    line described in :func:`_contour_height`.  The integrand is split into its principal parts (at the
    residue points, and double plus simple poles at ``+-z_j``) and a constant;
    the simple poles contribute through the line means of ``P1``.
    """
    curve = table.curve
    cur = curve.num
    ctx = cur.ctx
    zs = [ctx.mpc(z) for z in zs]
    terms: dict = {}
    for a in RESIDUE_POINTS:
        s = _integrand_at(g, n, table, a, zs)
        if s is None or s.min_exp >= 0:
            continue
        for j in range(-s.min_exp, 1, -1):
            c = s[-j]
            sign = 1 if j % 2 == 0 else -1
            terms[(a, j - 2)] = terms.get((a, j - 2), 0) + c / (sign * math.factorial(j - 1))
    extra = []  # (coefficient, kind, point): kind "P2" or "P1"
    for j, zj in enumerate(zs):
        if not (n >= 1 and (is_stable(g, n) or (g, n) == (0, 2))):
            break
        rest = zs[:j] + zs[j + 1 :]
        psi, dpsi = _psi(table, g, n, zj, rest)
        extra += [(-psi, "P2", zj), (-psi, "P2", -zj), (dpsi, "P1", zj), (-dpsi, "P1", -zj)]

    def model(z):
        v = _eval_terms(terms, z, curve, to_num=lambda x: x)
        for c, kind, p in extra:
            v += c * p_eval(kind, z - p, cur)
        return v

    c0 = None
    for z in regular_points(curve):
        z = ctx.mpc(z) + ctx.mpc("0.0137", "0.0071") * cur.scale
        val = r2w_value(table, g, n, z, zs) / (2 * p_eval("wp1", z, cur) ** 2)
        c0 = val - model(z)
        break
    total = c0
    for c, kind, p in extra:
        if kind == "P1":
            total += c * _p1_line_mean(p, curve)
    return total


def b_loop_quadrature(g: int, n: int, table: CorrelationTable, zs, nodes: int = 256):
    """Trapezoidal rule for the same A-cycle mean (periodic, so spectrally accurate)."""
    curve = table.curve
    cur = curve.num
    ctx = cur.ctx
    h = _contour_height(curve) * cur.scale
    acc = ctx.mpc(0)
    for k in range(nodes):
        z = h + cur.scale * ctx.mpf(k) / nodes
        acc += r2w_value(table, g, n, z, zs) / (2 * p_eval("wp1", z, cur) ** 2)
    return acc / nodes


# ---------------------------------------------------------------------------
# The identity tower and the loop equations
# ---------------------------------------------------------------------------


def identity_rhs(g: int, n: int, table: CorrelationTable, zs):
    """Right side of the identity tower at the spectators ``zs``.

    ``-w_{g,n+1}(0, zs) + sum_i d/dz_i [P1(z_i) w_{g,n}(-z_i, ...) / wp'(z_i)^2]``,
    valid for spectators in the fundamental domain centred at the origin.
    """
    cur = table.curve.num
    ctx = cur.ctx
    zs = [ctx.mpc(z) for z in zs]
    tot = -w_value(table, g, n + 1, [ctx.mpc(0)] + zs)
    for j, zj in enumerate(zs):
        rest = zs[:j] + zs[j + 1 :]
        psi, dpsi = _psi(table, g, n, zj, rest)
        # d/dz_j [2 P1 psi], using P1' = P2
        tot += 2 * (p_eval("P2", zj, cur) * psi + p_eval("P1", zj, cur) * dpsi)
    return tot


def loop_equation_residual(g: int, n: int, table: CorrelationTable, z, zs, route: str = "first"):
    """Left side of the loop equation at ``(z; zs)``; zero when it holds.

    Every slot at ``-u`` carries its Jacobian.  ``route="first"`` uses the
    constant ``2 (W_{g,n+1}(-z',zs)/dz')_{z'=0}``.  ``route="second"`` replaces
    it by ``sum_i d_{z_i}[2 P1(z_i)/wp'(z_i) W_{g,n}(-z_i, ...)/dx(z_i)] - 2 B``;
    with ``B`` as returned by :func:`b_loop_value` this residual equals ``-4 B``,
    i.e. that route closes only with the opposite sign on its ``B`` term.
    """
    cur = table.curve.num
    ctx = cur.ctx
    z = ctx.mpc(z)
    zs = [ctx.mpc(u) for u in zs]
    d1 = p_eval("wp1", z, cur)
    x = p_eval("wp", z, cur)
    tot = 0
    if g >= 1:
        tot += -_form(table, g - 1, n + 2, [(z, -1), (z, 1)] + [(u, 1) for u in zs]) / d1**2
    for g1, g2, I, J in _splits(g, zs):
        a = _form(table, g1, len(I) + 1, [(z, -1)] + [(u, 1) for u in I]) / d1
        b = _form(table, g2, len(J) + 1, [(z, -1)] + [(u, 1) for u in J]) / d1
        tot += a * b
    for j, zj in enumerate(zs):
        rest = zs[:j] + zs[j + 1 :]
        xj = p_eval("wp", zj, cur)
        dj = p_eval("wp1", zj, cur)
        d2j = p_eval("P2d", zj, cur, 2)
        wz = _form(table, g, n, [(z, -1)] + [(u, 1) for u in rest]) / d1
        first = dj / (x - xj) ** 2 * wz
        # d/dz_j [ -w(-z_j, rest) / ((x - x_j) wp'(z_j)) ]
        w = w_value(table, g, n, [-zj] + rest)
        wd = -w_slot_derivative(table, g, n, [-zj] + rest)
        D = (x - xj) * dj
        dD = -(dj**2) + (x - xj) * d2j
        second = -(wd / D - w * dD / D**2)
        tot += -(first - second)
    if route == "first":
        tot += 2 * _form(table, g, n + 1, [(ctx.mpc(0), -1)] + [(u, 1) for u in zs])
    else:
        for j, zj in enumerate(zs):
            rest = zs[:j] + zs[j + 1 :]
            psi, dpsi = _psi(table, g, n, zj, rest)
            tot += -4 * (p_eval("P2", zj, cur) * psi + p_eval("P1", zj, cur) * dpsi)
        tot += -2 * (b_loop_value(g, n, table, zs) if n else b_loop_integral(g, 0, table))
    return tot


def check_identity_tower(g: int, n: int, table: CorrelationTable, samples=None, count: int = 5, seed: int = 0) -> CheckReport:
    """Compare ``B_{g,n+1}`` with the right side of the identity at sample points."""
    curve = table.curve
    if (g, n + 1) not in table:
        raise ValueError(f"table lacks W_{g},{n + 1}")
    if samples is None:
        samples = sample_points(curve, count if n else 1, n, seed)
    left, right = [], []
    for zs in samples:
        if n == 0 and curve.exact:
            left.append(b_loop_integral(g, 0, table))
        else:
            left.append(b_loop_value(g, n, table, zs) if n else b_loop_integral(g, 0, table))
        right.append(identity_rhs(g, n, table, zs))
    return _report(f"identity_tower({g},{n})", curve, _inputs(curve, samples), left, right)


def check_loop_equation(g: int, n: int, table: CorrelationTable, samples=None, count: int = 3, seed: int = 1, route: str = "first") -> CheckReport:
    """Evaluate the integrated-form loop equation at ``(z; zs)`` samples."""
    curve = table.curve
    if samples is None:
        samples = sample_points(curve, count, n + 1, seed)
    left = [loop_equation_residual(g, n, table, s[0], s[1:], route) for s in samples]
    right = [0] * len(left)
    return _report(f"loop_equation({g},{n},{route})", curve, _inputs(curve, samples), left, right)


def check_pole_locations(g: int, n: int, table: CorrelationTable, include_completion: bool = True) -> CheckReport:
    """``Q2_{g,n+1} / dx^2`` has no poles at the half-periods or at the origin.

    The local series of ``f/wp'^2 - 2 w_{g,n+1}`` (the ``W_{0,1}`` terms give
    ``-2 wp'^2 w_{g,n+1}``) is built spectator-key by spectator-key from the
    recursion's tensor expansions; every negative-power coefficient must vanish.
    ``include_completion=False`` drops the ``W_{0,1}`` terms (a mutation check).
    """
    from wtr.recursion import expand_correlator, pole_order_at

    curve = table.curve
    W = table.W[(g, n + 1)]
    spect = tuple(range(n))
    left = []
    for a in RESIDUE_POINTS:
        integ = _integrand_at(g, n, table, a, None, extra=2)
        trunc = 1
        wexp = expand_correlator(W, (0,), spect, a, trunc, curve)
        keys = set(integ) | set(wexp.data)
        for key in keys:
            s = integ.get(key)
            q = None
            if s is not None:
                q = s.scale(2).truncate(trunc)
            if include_completion and key in wexp.data:
                t = wexp.data[key].scale(-2 * literal_sign(table, g, n + 1))
                q = t if q is None else q + t
            if q is None:
                continue
            for k in range(q.min_exp, 0):
                left.append(q[k])
    right = [0] * len(left)
    if not left:
        left, right = [0], [0]
    return _report(f"pole_locations({g},{n})", curve, {"curve": curve.describe()}, left, right)


def _inputs(curve, samples):
    return {"curve": curve.describe(), "samples": [[_fmt(u) for u in s] for s in samples]}


# ---------------------------------------------------------------------------
# Period integrals
# ---------------------------------------------------------------------------


def ellint_closed_form(curve: CurveData):
    """``G4 (5 G4 - G2^2) / (30 (20 G4^3 - 49 G6^2))``."""
    G2, G4, G6 = curve.G2, curve.G4, curve.G6
    num = G4 * (5 * G4 - G2**2)
    den = 30 * (20 * G4**3 - 49 * G6**2)
    return num / den


def _inv_wp1_sq(a, trunc, curve):
    return inverse_kernel_denominator(a, trunc, curve).scale(2)


def _half_period_expansions(factor, curve: CurveData, trunc: int = 4) -> dict:
    """``factor(a, order)`` times ``1/wp'^2`` at each half-period."""
    out = {}
    for a in (1, 2, 3):
        out[a] = laurent_mul(factor(a, trunc + 2), _inv_wp1_sq(a, trunc + 2, curve)).truncate(trunc)
    return out


def _reduce(expansions, value, curve):
    if curve.exact:
        return reduce_to_basis(expansions, curve)
    return reduce_to_basis(expansions, curve, value, _red_tol(curve))


def ellint_period(curve: CurveData):
    """A-period of ``P2(2z)/wp'(z)^2`` by reduction to the basis."""
    cur = curve.num

    def factor(a, order):
        base = scale_arg(p2_local(0, 0, max(order, 3), curve), 2)
        return LaurentSeries(a, base.min_exp, base.coeffs, base.trunc).truncate(order)

    exps = _half_period_expansions(factor, curve)

    def value(z):
        return p_eval("P2", 2 * z, cur) / p_eval("wp1", z, cur) ** 2

    return a_period(_reduce(exps, value, curve))


def check_ellint_period(curve: CurveData) -> CheckReport:
    """A-period of ``P2(2z)/wp'^2`` against the quasi-modular closed form.

    Also compares the closed form with ``g2 (g2 - 12 G2^2) / (2 Delta)``.
    """
    left = [ellint_period(curve)]
    right = [ellint_closed_form(curve)]
    left.append(right[0])
    right.append(curve.g2 * (curve.g2 - 12 * curve.G2**2) / (2 * curve.delta))
    return _report("ellint_period", curve, {"curve": curve.describe()}, left, right)


def basic_periods(curve: CurveData) -> dict:
    """A-periods of ``1/wp'^2``, ``wp/wp'^2`` and ``wp`` by basis reduction."""
    cur = curve.num
    one = _half_period_expansions(lambda a, o: LaurentSeries.make(a, 0, [1] + [0] * o, o + 1), curve)

    def wp_factor(a, o):
        from wtr.elliptic import wp_expand_at_halfperiod

        return wp_expand_at_halfperiod(a, o, curve)

    wpq = _half_period_expansions(wp_factor, curve)
    p_inv = a_period(_reduce(one, lambda z: 1 / p_eval("wp1", z, cur) ** 2, curve))
    p_wp = a_period(_reduce(wpq, lambda z: p_eval("wp", z, cur) / p_eval("wp1", z, cur) ** 2, curve))
    wp_at0 = p2_local(0, 0, 4, curve) - LaurentSeries.monomial(0, curve.G2, 0, 4)
    p_plain = a_period(_reduce({0: wp_at0}, lambda z: p_eval("wp", z, cur), curve))
    return {"inv_wp1_sq": p_inv, "wp_over_wp1_sq": p_wp, "wp": p_plain}


def basic_period_closed_forms(curve: CurveData) -> dict:
    g2, g3, G2, D = curve.g2, curve.g3, curve.G2, curve.delta
    return {
        "inv_wp1_sq": (18 * g3 - 12 * G2 * g2) / (2 * D),
        "wp_over_wp1_sq": (18 * G2 * g3 - g2**2) / (2 * D),
        "wp": -G2,
    }


def double_angle_residual(z, curve: CurveData):
    """``P2(2z) - (G2 - 2 wp + (1/4)(wp''/wp')^2)`` at a point."""
    cur = curve.num
    wp2 = p_eval("P2d", z, cur, 2)
    return p_eval("P2", 2 * z, cur) - (cur.G2 - 2 * p_eval("wp", z, cur) + (wp2 / p_eval("wp1", z, cur)) ** 2 / 4)


def check_basic_periods(curve: CurveData) -> CheckReport:
    got = basic_periods(curve)
    ref = basic_period_closed_forms(curve)
    keys = list(ref)
    return _report("basic_periods", curve, {"curve": curve.describe(), "integrals": keys}, [got[k] for k in keys], [ref[k] for k in keys])


def curve_relation_residual(z, curve: CurveData):
    """``(W_{0,1}(-z)/dx(z))^2 - (4x^3 - g2 x - g3)`` at ``z``; zero identically."""
    cur = curve.num
    d1 = p_eval("wp1", z, cur)
    x = p_eval("wp", z, cur)
    half = -(p_eval("wp1", -z, cur) ** 2) / d1
    return half**2 - (4 * x**3 - cur.g2 * x - cur.g3)
