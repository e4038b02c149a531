"""Non-perturbative wave-function on ``y^2 = 4(x^3 - 1)`` and its quantum curve.

The ``S_k`` (``k >= 2``) are sums over multisets of labels ``(h, d, n)``: each
label is a B-cycle contraction of ``W_{h, n+d}`` in ``d`` slots with the other
``n`` slots integrated from 0 to ``z``, and each multiset carries the joint
cumulant of theta-derivative ratios at the shifted argument.  Terms with
undotted ratios (theta at argument 0, where it vanishes) multiply
``z``-independent factors only and are dropped: they rescale ``psi`` by a
constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from wtr.basis import basis_b_period, basis_primitive_value
from wtr.elliptic import CurveData, curve_constants, p_eval, theta_deriv
from wtr.identities import _report, literal_sign
from wtr.recursion import CorrelationTable, is_stable, run_to_level

__all__ = [
    "NP_MAX_K",
    "ThetaContext",
    "VCache",
    "WkbSystem",
    "zeta_hbar",
    "wp1_sq_reduction",
    "g_hdn",
    "v_bullet",
    "cumulant",
    "s_labels",
    "s_terms",
    "s_np",
    "s_np_xderivs",
    "closed_form_xderiv",
    "wkb_extract",
    "reconstruct",
    "quantum_curve_report",
    "special_setup",
    "central_differences",
    "wkb_sample",
    "EXPECTED",
]

NP_MAX_K = 4
# fraction denominator bound for rational reconstruction
DENOM_BOUND = 10**6


# ---------------------------------------------------------------------------
# Quantization condition
# ---------------------------------------------------------------------------


def wp1_sq_reduction(curve: CurveData):
    """``wp'^2 = P2''''/30 - (2/5) g2 P2 + c0`` as ``(c0, coefficient of P2)``."""
    c = curve.num
    g2, g3, G2 = c.g2, c.g3, c.G2
    return (2 * g2 * G2 - 3 * g3) / 5, -2 * g2 / 5


def zeta_hbar(curve: CurveData):
    """Coefficient of ``1/hbar`` in ``(B-period - tau A-period) of y dx / (2 pi i hbar)``.

    Equals ``-(2/5) g2 / scale`` and vanishes exactly on the special curve.
    """
    if curve.exact:
        return curve.g2  # exact zero: g2 is the rational 0
    c = curve.num
    ctx = c.ctx
    c0, p2 = wp1_sq_reduction(curve)
    a_per = c0 * c.scale
    b_per = c0 * c.scale * c.tau + 2j * ctx.pi / c.scale * p2
    return (b_per - c.tau * a_per) / (2j * ctx.pi)


# ---------------------------------------------------------------------------
# Theta ratios
# ---------------------------------------------------------------------------


@dataclass
class ThetaContext:
    """Theta data at ``tau0 = exp(2 pi i / 3)`` for the special curve."""

    curve: CurveData
    zeta: object = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.curve.special:
            raise ValueError("the non-perturbative wave-function needs the special curve")
        self.zeta = zeta_hbar(self.curve)
        if self.zeta != 0:
            raise ValueError("quantization condition fails: zeta_hbar != 0")

    @property
    def num(self) -> CurveData:
        return self.curve.num

    def ratios(self, z, dmax: int) -> list:
        """``[theta^(d)(u) / theta(u)]`` for ``d = 0..dmax`` at ``u = z / scale``."""
        cur = self.num
        z = cur.ctx.mpc(z)
        key = (z.real, z.imag, dmax)
        if key not in self._cache:
            u = z / cur.scale
            th = [theta_deriv(d, u, cur) for d in range(dmax + 1)]
            if abs(th[0]) < cur.eps() * 1e6:
                raise ValueError("theta vanishes at this point")
            self._cache[key] = [t / th[0] for t in th]
        return self._cache[key]


def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def cumulant(dlist, moments: list):
    """Joint cumulant of ``nabla^d1, ..., nabla^dj`` with moments ``E(nabla^a) = moments[a]``.

    ``d/dt_1 ... d/dt_j log E(exp(sum t_i nabla^(d_i)))`` at ``t = 0``.
    """
    dlist = list(dlist)
    if not dlist:
        return 1
    total = 0
    for part in _set_partitions(list(range(len(dlist)))):
        b = len(part)
        prod = (-1) ** (b - 1) * math.factorial(b - 1)
        for block in part:
            prod = prod * moments[sum(dlist[i] for i in block)]
        total = total + prod
    return total


class VCache:
    """Dotted ``V`` values at one point, keyed by sorted derivative tuples."""

    def __init__(self, theta: ThetaContext, z, dmax: int):
        self.moments = theta.ratios(z, dmax)
        self.values: dict = {}

    def __call__(self, dlist):
        key = tuple(sorted(dlist))
        if key not in self.values:
            self.values[key] = cumulant(key, self.moments)
        return self.values[key]


def v_bullet(dlist, z, theta: ThetaContext):
    """Dotted ``V^(d1, ..., dj)`` at ``z``."""
    return VCache(theta, z, max(sum(dlist), 1))(dlist)


# ---------------------------------------------------------------------------
# Cycle-contracted correlators
# ---------------------------------------------------------------------------


def _contracted(table: CorrelationTable, h: int, d: int, n: int) -> dict:
    """``W_{h,n+d}`` with its first ``d`` slots replaced by B-periods, as a map on the rest."""
    cache = table.__dict__.setdefault("_np_contracted", {})
    key = (h, d, n)
    if key in cache:
        return cache[key]
    curve = table.curve
    cur = curve.num
    ctx = cur.ctx
    s = literal_sign(table, h, n + d)
    pref = ctx.mpf(1) / (math.factorial(n) * math.factorial(d)) / (2j * ctx.pi) ** d
    out: dict = {}
    for k, c in table.W[(h, n + d)].terms.items():
        v = curve.to_num(c) * s * pref
        for f in k[:d]:
            v = v * basis_b_period(f, cur)
        if v == 0:
            continue
        rest = tuple(k[d:])
        out[rest] = out.get(rest, 0) + v
    cache[key] = out
    return out


def g_hdn(h: int, d: int, n: int, z, table: CorrelationTable):
    """``1/(n! (2 pi i)^d d!)`` times ``W_{h,n+d}`` with ``d`` B-periods and ``n`` primitives to ``z``.

    Correlators are taken in the literal residue orientation.  A B-period of
    ``P2(u - p) du`` is ``2 pi i / scale``; derivatives of ``P2`` have none.
    """
    if not is_stable(h, n + d):
        raise ValueError(f"({h}, {n + d}) is not stable")
    if (h, n + d) not in table.W:
        raise ValueError(f"W_{{{h},{n + d}}} is beyond the table level")
    cur = table.curve.num
    z = cur.ctx.mpc(z)
    prims: dict = {}

    def prim(f):
        if f not in prims:
            prims[f] = z if f is None else basis_primitive_value(f, z, cur)
        return prims[f]

    acc = cur.ctx.mpc(0)
    for rest, c in _contracted(table, h, d, n).items():
        v = c
        for f in rest:
            v = v * prim(f)
        acc += v
    return acc


# ---------------------------------------------------------------------------
# S_k as a sum over label multisets
# ---------------------------------------------------------------------------


def _grade(label) -> int:
    h, d, n = label
    return 2 * h + n + d - 2


def s_labels(k: int) -> list:
    """Stable labels ``(h, d, n)`` of grade ``1..k-1``."""
    out = []
    for gr in range(1, k):
        for h in range(0, gr // 2 + 2):
            tot = gr + 2 - 2 * h
            for d in range(0, tot + 1):
                if tot >= 1 and is_stable(h, tot):
                    out.append((h, d, tot - d))
    return out


def s_terms(k: int) -> list:
    """``(weight, labels)`` for every multiset of total grade ``k - 1``;
    ``weight`` is ``1/prod(multiplicity!)``.

    Multisets mixing a label with ``d = 0`` and anything else have zero cumulant
    and are skipped.  Only the dotted part is kept: the undotted subtraction
    that accompanies multisets with no primitive slot is a constant.
    """
    if k < 2:
        raise ValueError("S_0 and S_1 are given in closed form")
    labels = s_labels(k)
    out = []
    for j in range(1, k):
        for combo in combinations_with_replacement(labels, j):
            if sum(_grade(x) for x in combo) != k - 1:
                continue
            if j > 1 and any(x[1] == 0 for x in combo):
                continue
            w = Fraction(1)
            for x in set(combo):
                w /= math.factorial(combo.count(x))
            out.append((w, combo))
    return out


def special_setup(prec: int = 60, level: int = 3):
    """Numeric special curve, its correlator table and theta context."""
    curve = curve_constants("special", prec, mode="numeric")
    return run_to_level(level, curve), ThetaContext(curve)


def s_np(k: int, z, table: CorrelationTable, theta: ThetaContext, undotted: dict | None = None):
    """``S_k(z)`` for ``2 <= k <= 4`` up to an additive constant.

    ``undotted`` optionally maps ``d`` to a finite stand-in for the undotted
    ratio at argument 0; the subtraction terms are then included.
    """
    if not 2 <= k <= NP_MAX_K:
        raise ValueError(f"s_np covers 2 <= k <= {NP_MAX_K}")
    if table.top_level < k - 1:
        raise ValueError(f"S_{k} needs correlators up to level {k - 1}")
    terms = s_terms(k)
    dmax = max(sum(x[1] for x in combo) for _, combo in terms)
    V = VCache(theta, z, dmax)
    gvals: dict = {}
    acc = table.curve.num.ctx.mpc(0)
    for w, combo in terms:
        prod = V([x[1] for x in combo])
        for x in combo:
            if x not in gvals:
                gvals[x] = g_hdn(*x, z, table)
            prod = prod * gvals[x]
        if undotted is not None and all(x[2] == 0 for x in combo):
            sub = 1
            for x in combo:
                sub = sub * undotted[x[1]] * gvals[x]
            prod -= sub
        acc += prod * w.numerator / w.denominator
    return acc


# central-difference weights, 8th order, offsets -4..4
_D1 = [(1, 280), (-4, 105), (1, 5), (-4, 5), (0, 1), (4, 5), (-1, 5), (4, 105), (-1, 280)]
_D2 = [(-1, 560), (8, 315), (-1, 5), (8, 5), (-205, 72), (8, 5), (-1, 5), (8, 315), (-1, 560)]


def central_differences(f, z, ctx, step):
    """First and second derivative of ``f`` at ``z`` from a 9-point stencil."""
    vals = [f(z + (i - 4) * step) for i in range(9)]
    d1 = sum(v * ctx.mpf(a) / b for v, (a, b) in zip(vals, _D1)) / step
    d2 = sum(v * ctx.mpf(a) / b for v, (a, b) in zip(vals, _D2)) / step**2
    return d1, d2


def s_np_xderivs(k: int, z, table: CorrelationTable, theta: ThetaContext):
    """``(dS_k/dx, d^2 S_k/dx^2)`` at ``z``, ``x = wp(z)``.

    In ``z``: ``S_0' = wp'^2``, ``S_1' = -wp''/(2 wp')``; the higher ``S_k``
    by central differences at step ``10^(-prec/4)``.
    """
    cur = table.curve.num
    ctx = cur.ctx
    z = ctx.mpc(z)
    p1 = p_eval("wp1", z, cur)
    p2 = p_eval("P2d", z, cur, 2)
    if k == 0:
        s1, s2 = p1**2, 2 * p1 * p2
    elif k == 1:
        p3 = p_eval("P2d", z, cur, 3)
        s1 = -p2 / (2 * p1)
        s2 = -p3 / (2 * p1) + p2**2 / (2 * p1**2)
    else:
        step = ctx.mpf(10) ** (-(cur.prec // 4))
        s1, s2 = central_differences(lambda u: s_np(k, u, table, theta), z, ctx, step)
    return s1 / p1, (s2 - s1 * p2 / p1) / p1**2


# (numerator, denominator, power of 1/wp') per term; k = 2, 4 carry wp, wp^2
_CLOSED = {
    2: (1, [(-1, 24, 1), (-21, 8, 3), (-45, 2, 5)]),
    3: (0, [(-1, 1152, 0), (-1, 24, 2), (-109, 16, 4), (-243, 2, 6), (-405, 1, 8)]),
    4: (2, [(-1, 13824, 1), (-1, 1152, 3), (-31, 64, 5), (-13641, 128, 7), (-41769, 16, 9), (-89505, 8, 11)]),
}


def closed_form_xderiv(k: int, z, curve: CurveData):
    """Rational expression in ``wp, wp'`` for ``dS_k/dx`` on the special curve, ``k <= 4``."""
    cur = curve.num
    ctx = cur.ctx
    x = p_eval("wp", z, cur)
    y = p_eval("wp1", z, cur)
    if k == 0:
        return y
    if k == 1:
        return -3 * x**2 / y**2
    if k not in _CLOSED:
        raise ValueError("closed forms are known for k <= 4")
    xp, terms = _CLOSED[k]
    return x**xp * sum(ctx.mpf(a) / b / y**p for a, b, p in terms)


# ---------------------------------------------------------------------------
# WKB extraction
# ---------------------------------------------------------------------------


def a_degree(i: int) -> int:
    """Degree bound of ``A_i`` (pole order at most ``i - 4`` at ``z = 0``); ``-1`` means absent."""
    return max((i - 4) // 2, -1)


def b_degree(j: int) -> int:
    """Degree bound of ``B_j`` (pole order at most ``j``)."""
    return j // 2


@dataclass
class WkbSystem:
    """Solved polynomial coefficients of ``A_i`` and ``B_j``.

    ``A[i]`` and ``B[j]`` list coefficients in ascending powers of ``x``;
    ``fit_residual[k]`` is the largest residual of order ``k`` at held-out points.
    """

    order: int
    A: dict
    B: dict
    fit_residual: dict
    degree_slack: int = 0

    def max_residual(self):
        return max(self.fit_residual.values())

    def to_dict(self) -> dict:
        def enc(v):
            return [[str(c.real), str(c.imag)] for c in v]

        return {
            "order": self.order,
            "degree_slack": self.degree_slack,
            "A": {str(i): enc(v) for i, v in self.A.items()},
            "B": {str(j): enc(v) for j, v in self.B.items()},
            "fit_residual": {str(k): str(v) for k, v in self.fit_residual.items()},
        }


def _wkb_rows(data: list, k: int, A: dict, da: int, db: int):
    """Rows and right-hand sides at order ``k``; unknowns ``A_{k+1}`` then ``B_k``."""
    rows, rhs = [], []
    for x, s1, s2 in data:
        known = sum(s1[l] * s1[k - l] for l in range(k + 1))
        if k >= 1:
            known += s2[k - 1]
        for l in range(k):
            known += s1[k - l] * sum(c * x**p for p, c in enumerate(A[l + 1]))
        if k == 0:
            known -= 4 * (x**3 - 1)
        rows.append([s1[0] * x**p for p in range(da + 1)] + [x**p for p in range(db + 1)])
        rhs.append(-known)
    return rows, rhs


def wkb_sample(points, kmax: int, table: CorrelationTable, theta: ThetaContext) -> list:
    """``(x, [S_k'], [S_k''])`` at each point, ``k = 0..kmax``, derivatives in ``x``."""
    cur = table.curve.num
    out = []
    for z in points:
        pairs = [s_np_xderivs(k, z, table, theta) for k in range(kmax + 1)]
        out.append((p_eval("wp", z, cur), [a for a, _ in pairs], [b for _, b in pairs]))
    return out


def wkb_extract(order: int, fit_points, check_points, table: CorrelationTable, theta: ThetaContext,
                degree_slack: int = 0) -> WkbSystem:
    """Solve the WKB equations at orders ``k = 0..order - 1``.

    Order ``k`` involves ``S_0..S_k`` and fixes ``A_{k+1}`` and ``B_k`` under the
    degree bounds (each raised by ``degree_slack``).  Each order is solved by
    least squares over ``fit_points``; the residual is measured at ``check_points``.
    """
    if not 1 <= order <= NP_MAX_K + 1:
        raise ValueError(f"order must lie in 1..{NP_MAX_K + 1}")
    ctx = table.curve.num.ctx
    kmax = order - 1
    fit = wkb_sample(fit_points, kmax, table, theta)
    held = wkb_sample(check_points, kmax, table, theta)
    A: dict = {}
    B: dict = {}
    resid: dict = {}
    for k in range(kmax + 1):
        da = a_degree(k + 1) + degree_slack if a_degree(k + 1) >= 0 else degree_slack - 1
        db = b_degree(k) + degree_slack
        rows, rhs = _wkb_rows(fit, k, A, da, db)
        ncols = len(rows[0])
        if len(rows) < ncols:
            raise ValueError("fewer fit points than unknowns")
        try:
            sol, _ = ctx.qr_solve(ctx.matrix(rows), ctx.matrix(rhs))
        except ZeroDivisionError as exc:
            raise ValueError("degenerate sample set") from exc
        coeffs = [sol[i] for i in range(ncols)]
        A[k + 1] = coeffs[: da + 1]
        B[k] = coeffs[da + 1 :]
        hrows, hrhs = _wkb_rows(held, k, A, da, db)
        resid[k] = max(abs(sum(r[i] * coeffs[i] for i in range(ncols)) - t) for r, t in zip(hrows, hrhs))
    return WkbSystem(order, A, B, resid, degree_slack)


def reconstruct(value, ctx, bound: int = DENOM_BOUND, tol=None) -> Fraction | None:
    """Nearest fraction with denominator at most ``bound``.

    ``None`` when the value has an imaginary part or lies farther than ``tol``
    from that fraction.
    """
    tol = ctx.mpf(10) ** (-20) if tol is None else tol
    v = ctx.mpc(value)
    if abs(v.imag) > tol:
        return None
    f = Fraction(ctx.nstr(v.real, ctx.dps, min_fixed=-ctx.inf, max_fixed=ctx.inf)).limit_denominator(bound)
    if abs(v.real - ctx.mpf(f.numerator) / f.denominator) > tol:
        return None
    return f


# nonzero coefficients of the operator through hbar^5: (kind, index, power of x) -> value
EXPECTED = {("A", 4, 0): Fraction(1, 576), ("B", 2, 1): Fraction(1, 12), ("B", 4, 2): Fraction(1, 6912)}


def quantum_curve_report(order: int, table: CorrelationTable, theta: ThetaContext, fit_points, check_points,
                         degree_slack: int = 1, tol=None):
    """Extract the operator and compare every coefficient with the expected rationals.

    Returns ``(report, system, rationals)``: ``rationals`` maps ``(kind, index,
    power)`` to the reconstructed fraction (or ``None``).  The report passes when
    every coefficient is within ``tol`` of its expected value (zero unless listed
    in ``EXPECTED``), every reconstruction is exact and the held-out fit residual
    is below ``tol``.
    """
    curve = table.curve
    ctx = curve.num.ctx
    tol = ctx.mpf(10) ** (25 - curve.prec) if tol is None else tol
    system = wkb_extract(order, fit_points, check_points, table, theta, degree_slack)
    left, right, names = [], [], []
    rationals: dict = {}
    for kind, polys in (("A", system.A), ("B", system.B)):
        for i, poly in sorted(polys.items()):
            for p, c in enumerate(poly):
                key = (kind, i, p)
                want = EXPECTED.get(key, Fraction(0))
                names.append(f"{kind}{i}[x^{p}]")
                left.append(c)
                right.append(ctx.mpf(want.numerator) / want.denominator)
                rationals[key] = reconstruct(c, ctx, tol=tol)
    inputs = {"order": order, "degree_slack": degree_slack, "coefficients": names,
              "fit_points": len(fit_points), "check_points": len(check_points)}
    report = _report("quantum_curve", curve, inputs, left, right, tol=tol)
    exact = all(rationals[k] == EXPECTED.get(k, Fraction(0)) for k in rationals)
    fit_ok = system.max_residual() < tol
    report.passed = bool(report.passed and exact and fit_ok)
    report.inputs["fit_residual"] = ctx.nstr(system.max_residual(), 5)
    return report, system, rationals
