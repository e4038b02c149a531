"""Topological recursion on the Weierstrass curve.

``W_{g,n}`` is stored as a :class:`~wtr.basis.MultiExpr` in the variables
``z_0, ..., z_{n-1}`` (the ``dz`` measures are implicit).  Stable correlators
are even in each variable and have poles only at the half-periods, so every
factor is ``P2^(m)(z_j - omega_a)`` with even ``m``.

One step of the recursion expands the integrand at each residue point
``a`` in the local coordinate ``t = z - a``.  Writing
``F_a(t) = f(a + t) / (2 wp'(a + t)^2)`` with ``f`` the two-point combination of
lower correlators, the kernel's ``z_0``-dependence lands directly in the basis:

    W_{g,n+1}(z_0, ...) = -sum_a sum_{k odd} [t^(-k-1)] F_a / k! * P2^(k-1)(z_0 - a).

The leading minus is the residue orientation (see ``ORIENTATION``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from gmpy2 import mpq

from wtr.algebra import LaurentSeries, laurent_inv, laurent_mul
from wtr.basis import MultiExpr, pole_point, scale_arg, term_series_at
from wtr.elliptic import CurveData, p2_local, p_eval, wp_expand_at_halfperiod

RESIDUE_POINTS = (1, 2, 3, 0)
HEADROOM = 2
# level 4 feeds the order-5 terms of the wave-function operators
MAX_LEVEL = 4
# Overall orientation of the residue sum.  With the Jacobian d(-z) = -dz kept
# inside R2W, -1 reproduces the closed forms of the low-level correlators; the
# literal sum (+1) differs from it by (-1)^(2g-2+n).
ORIENTATION = -1


class RecursionError(ArithmeticError):
    pass


def is_stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


def level(g: int, n: int) -> int:
    return 2 * g - 2 + n


def _div(x, n: int):
    if isinstance(x, int):
        return mpq(x, n)
    return x / n


# ---------------------------------------------------------------------------
# Tensor series: spectator key -> LaurentSeries in t
# ---------------------------------------------------------------------------


@dataclass
class TensorSeries:
    """``positions`` lists the spectator indices covered by each key, in order."""

    positions: tuple
    data: dict = field(default_factory=dict)

    def add(self, other: "TensorSeries") -> "TensorSeries":
        if not self.data:
            return other
        if not other.data:
            return self
        if other.positions != self.positions:
            raise RecursionError("spectator mismatch in tensor sum")
        out = dict(self.data)
        for k, s in other.data.items():
            out[k] = out[k] + s if k in out else s
        return TensorSeries(self.positions, out)

    def scale(self, c) -> "TensorSeries":
        return TensorSeries(self.positions, {k: s.scale(c) for k, s in self.data.items()})

    def mul_series(self, s: LaurentSeries) -> "TensorSeries":
        return TensorSeries(self.positions, {k: laurent_mul(v, s) for k, v in self.data.items()})

    def min_exp(self) -> int:
        return min((s.min_exp for s in self.data.values()), default=0)


def tensor_mul(A: TensorSeries, B: TensorSeries) -> TensorSeries:
    if set(A.positions) & set(B.positions):
        raise RecursionError("overlapping spectators in tensor product")
    merged = tuple(sorted(A.positions + B.positions))
    where = {p: i for i, p in enumerate(merged)}
    ia = [where[p] for p in A.positions]
    ib = [where[p] for p in B.positions]
    out: dict = {}
    for ka, sa in A.data.items():
        for kb, sb in B.data.items():
            key = [None] * len(merged)
            for i, f in zip(ia, ka):
                key[i] = f
            for i, f in zip(ib, kb):
                key[i] = f
            key = tuple(key)
            prod = laurent_mul(sa, sb)
            out[key] = out[key] + prod if key in out else prod
    return TensorSeries(merged, out)


# ---------------------------------------------------------------------------
# Local expansions of correlators
# ---------------------------------------------------------------------------


def pole_order_at(W: MultiExpr, slots, a) -> int:
    """Largest total pole order at ``z = a`` when ``slots`` are set to ``z``."""
    best = 0
    for key in W.terms:
        tot = 0
        for j in slots:
            f = key[j]
            if f is not None and f[0] == a:
                tot += f[1] + 2
        best = max(best, tot)
    return best


def expand_correlator(W: MultiExpr, slots, spect_positions, a, trunc: int, curve: CurveData) -> TensorSeries:
    """Set the variables in ``slots`` to ``a + t`` and expand; the others become spectators."""
    others = [j for j in range(W.n) if j not in slots]
    if len(others) != len(spect_positions):
        raise RecursionError("spectator count mismatch")
    order = list(spect_positions)
    perm = sorted(range(len(order)), key=lambda i: order[i])
    positions = tuple(order[i] for i in perm)
    pole_tot = pole_order_at(W, slots, a)
    out: dict = {}
    for key, c in W.terms.items():
        s = None
        extra = pole_tot
        for j in slots:
            f = key[j]
            fs = _factor_series(f, a, trunc + extra, curve)
            s = fs if s is None else laurent_mul(s, fs)
        s = s.scale(c).truncate(trunc)
        rest = tuple(key[others[i]] for i in perm)
        out[rest] = out[rest] + s if rest in out else s
    return TensorSeries(positions, out)


def _factor_series(f, a, trunc: int, curve: CurveData) -> LaurentSeries:
    if f is None:
        return LaurentSeries.monomial(a, 1, 0, trunc)
    pole, m = f
    return term_series_at(pole, m, a, trunc, curve)


def _shift_pair_series(j: int, a, trunc: int, sign_minus: int, sign_plus: int) -> TensorSeries:
    """``sign_minus P2(z - z_j) + sign_plus P2(z + z_j)`` at ``z = a + t``.

    ``P2(a + t -+ z_j) = sum_k (-+t)^k / k! P2^(k)(z_j - a)`` because ``2a`` is a period.
    """
    data = {}
    for k in range(max(trunc, 0)):
        c = sign_minus * (-1) ** k + sign_plus
        if c:
            data[((a, k),)] = LaurentSeries.monomial(a, mpq(c, math.factorial(k)), k, trunc)
    return TensorSeries((j,), data)


def _single_shift_series(j: int, a, trunc: int, sign: int) -> TensorSeries:
    """``P2(z + sign * z_j)`` at ``z = a + t`` (``sign = -1`` for ``z - z_j``)."""
    data = {}
    for k in range(max(trunc, 0)):
        c = (-1) ** k if sign < 0 else 1
        data[((a, k),)] = LaurentSeries.monomial(a, mpq(c, math.factorial(k)), k, trunc)
    return TensorSeries((j,), data)


# ---------------------------------------------------------------------------
# The recursion
# ---------------------------------------------------------------------------


@dataclass
class CorrelationTable:
    curve: CurveData
    W: dict = field(default_factory=dict)
    integrands: dict = field(default_factory=dict)
    top_level: int = 0
    orientation: int = ORIENTATION

    def __getitem__(self, gn):
        return self.W[gn]

    def __contains__(self, gn):
        return gn in self.W or gn in ((0, 1), (0, 2))

    def keys(self):
        return [(0, 1), (0, 2)] + sorted(self.W, key=lambda gn: (level(*gn), gn))


def inverse_kernel_denominator(a, trunc: int, curve: CurveData) -> LaurentSeries:
    """Series of ``1 / (2 wp'(a + t)^2)`` truncated at ``t^trunc``."""
    key = ("kden", a, trunc)
    hit = curve._cache.get(key)
    if hit is not None:
        return hit
    d = p2_local(a, 1, trunc + 2 * (6 if a == 0 else 1) + 4, curve)
    sq = laurent_mul(d, d)
    inv = laurent_inv(sq.scale(2))
    if inv.trunc < trunc:
        raise RecursionError("insufficient order for the kernel denominator")
    inv = inv.truncate(trunc)
    curve._cache[key] = inv
    return inv


def assemble_r2w(g: int, n: int, table: CorrelationTable, a, trunc: int) -> TensorSeries:
    """Expansion at ``z = a + t`` of the function ``f`` with ``R2W_{g,n+1}(z,-z;...) = f dz^2``.

    Slots evaluated at ``-z`` carry the measure sign; stable correlators are even,
    so ``f = -[w_{g-1,n+2}(z,z,...) + sum_stable w w + sum_j (P2(z-z_j)+P2(z+z_j)) w_{g,n}(z,...)]``.
    """
    curve = table.curve
    spect = tuple(range(n))
    if (g, n) == (1, 0):
        base = scale_arg(p2_local(0, 0, max(trunc, 3), curve), 2)
        base = LaurentSeries(a, base.min_exp, base.coeffs, base.trunc).truncate(trunc)
        return TensorSeries((), {(): -base})
    if (g, n) == (0, 2):
        # W02(z,z1) W02(-z,z2) + (1 <-> 2), each W02(-z, zj) = -P2(z + zj)
        t1 = tensor_mul(_single_shift_series(0, a, trunc + 2, -1), _single_shift_series(1, a, trunc + 2, +1))
        t2 = tensor_mul(_single_shift_series(1, a, trunc + 2, -1), _single_shift_series(0, a, trunc + 2, +1))
        tot = t1.add(t2)
        return TensorSeries(tot.positions, {k: (-s).truncate(trunc) for k, s in tot.data.items()})
    total = TensorSeries(spect, {})
    if g >= 1 and is_stable(g - 1, n + 2):
        W = table.W[(g - 1, n + 2)]
        total = total.add(expand_correlator(W, (0, 1), spect, a, trunc, curve))
    for g1 in range(g + 1):
        g2 = g - g1
        for r in range(n + 1):
            for I in itertools.combinations(spect, r):
                J = tuple(j for j in spect if j not in I)
                if not (is_stable(g1, len(I) + 1) and is_stable(g2, len(J) + 1)):
                    continue
                W1, W2 = table.W[(g1, len(I) + 1)], table.W[(g2, len(J) + 1)]
                p1 = pole_order_at(W1, (0,), a)
                p2 = pole_order_at(W2, (0,), a)
                A = expand_correlator(W1, (0,), I, a, trunc + p2, curve)
                B = expand_correlator(W2, (0,), J, a, trunc + p1, curve)
                prod = tensor_mul(A, B)
                total = total.add(_retrunc(prod, trunc))
    if n >= 1 and is_stable(g, n):
        W = table.W[(g, n)]
        pw = pole_order_at(W, (0,), a)
        for j in spect:
            rest = tuple(i for i in spect if i != j)
            A = expand_correlator(W, (0,), rest, a, trunc, curve)
            S = _shift_pair_series(j, a, trunc + pw, 1, 1)
            total = total.add(_retrunc(tensor_mul(S, A), trunc))
    return TensorSeries(total.positions, {k: (-s).truncate(trunc) for k, s in total.data.items()})


def _retrunc(T: TensorSeries, trunc: int) -> TensorSeries:
    out = {}
    for k, s in T.data.items():
        if s.trunc < trunc:
            raise RecursionError("insufficient truncation order in integrand")
        out[k] = s.truncate(trunc)
    return TensorSeries(T.positions, out)


_MPQ = type(mpq(0))


def _mag(x):
    """``|x|`` usable in comparisons with mpf values."""
    if isinstance(x, (int, _MPQ)):
        return abs(float(x))
    return abs(x)


def _is_negligible(x, tol) -> bool:
    if tol is None:
        return not x
    return _mag(x) <= tol


def _predict_pole_order(g: int, n: int, table: CorrelationTable, a) -> int:
    """Bound on the pole order of ``f`` at ``a`` from the lower correlators."""
    if (g, n) == (1, 0):
        return 2
    if (g, n) == (0, 2):
        return 0
    best = 0
    if g >= 1 and is_stable(g - 1, n + 2):
        best = max(best, pole_order_at(table.W[(g - 1, n + 2)], (0, 1), a))
    for (gg, nn), W in table.W.items():
        if level(gg, nn) < level(g, n + 1):
            best = max(best, 2 * pole_order_at(W, (0,), a))
    return best


def recursion_step(g: int, n: int, table: CorrelationTable, tol=None) -> MultiExpr:
    """Compute ``W_{g,n+1}`` from the lower entries of ``table``."""
    curve = table.curve
    if tol is None and not curve.exact:
        tol = curve.ctx.mpf(10) ** (-(curve.prec + 2))
    out: dict = {}
    for a in RESIDUE_POINTS:
        pf = _predict_pole_order(g, n, table, a)
        f = assemble_r2w(g, n, table, a, 2 + HEADROOM if a != 0 else 1)
        fmin = f.min_exp()
        if -fmin > pf:
            raise RecursionError(f"pole order at {a} exceeds prediction ({-fmin} > {pf})")
        inv = inverse_kernel_denominator(a, pf + 2 + HEADROOM, curve)
        table.integrands[(g, n + 1, a)] = {}
        scale = _tensor_scale(f, tol)
        for key, fs in f.data.items():
            F = laurent_mul(fs, inv)
            if F.trunc < 0:
                raise RecursionError("residue coefficient beyond the trusted range")
            table.integrands[(g, n + 1, a)][key] = F
            for k in range(F.min_exp, F.trunc):
                if k % 2 and not _is_negligible(F[k], None if tol is None else tol * scale):
                    raise RecursionError(f"integrand not even at {a}: t^{k} coefficient {F[k]}")
            if a == 0:
                if F.min_exp < 0 and any(not _is_negligible(F[k], None if tol is None else tol * scale) for k in range(F.min_exp, 0)):
                    raise RecursionError("nonzero residue contribution at the origin")
                continue
            for k in range(1, -F.min_exp, 2):
                c = F[-k - 1]
                if not c:
                    continue
                okey = ((a, k - 1),) + key
                val = _div(table.orientation * c, math.factorial(k))
                out[okey] = out[okey] + val if okey in out else val
    W = _clean(out, curve, tol)
    check_symmetry(W, curve, tol)
    return W


def _tensor_scale(T: TensorSeries, tol):
    if tol is None:
        return 1
    m = 0
    for s in T.data.values():
        for c in s.coeffs:
            m = max(m, _mag(c))
    return m if m else 1


def _clean(out: dict, curve: CurveData, tol) -> MultiExpr:
    n = len(next(iter(out))) if out else 0
    if tol is None:
        terms = {}
        for k, c in out.items():
            if not c:
                continue
            if any(f is not None and f[0] == 0 for f in k):
                raise RecursionError("spectator pole at the origin did not cancel")
            terms[k] = c
        return MultiExpr(n, terms)
    big = max((_mag(c) for c in out.values()), default=0)
    thresh = tol * (big if big else 1) * 10**6
    terms = {}
    for k, c in out.items():
        if any(f is not None and f[0] == 0 for f in k):
            if _mag(c) > thresh:
                raise RecursionError(f"spectator pole at the origin did not cancel ({c})")
            continue
        if _mag(c) > thresh:
            terms[k] = c
    return MultiExpr(n, terms)


def check_symmetry(W: MultiExpr, curve: CurveData, tol=None):
    if W.n < 2:
        return
    perms = [tuple([1, 0] + list(range(2, W.n))), tuple(list(range(1, W.n)) + [0])]
    big = max((abs(curve.to_num(c)) for c in W.terms.values()), default=1) if tol is not None else 1
    for perm in perms:
        P = W.permuted(perm)
        keys = set(W.terms) | set(P.terms)
        for k in keys:
            d = W.terms.get(k, 0) - P.terms.get(k, 0)
            if tol is None:
                if d:
                    raise RecursionError(f"symmetry failure at {k}")
            elif _mag(d) > tol * big * 10**8:
                raise RecursionError(f"symmetry failure at {k}: {d}")


def run_to_level(L: int, curve: CurveData, orientation: int = ORIENTATION) -> CorrelationTable:
    """All ``W_{g,n}`` with ``2g - 2 + n <= L`` (``L <= 4``).

    ``orientation=+1`` gives the literal residue sum; the two choices differ by
    ``(-1)^(2g-2+n)``.
    """
    if L > MAX_LEVEL:
        raise ValueError(f"levels above {MAX_LEVEL} are not supported")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    table = CorrelationTable(curve, orientation=orientation)
    for lev in range(1, L + 1):
        for g in range(0, lev // 2 + 2):
            nplus1 = lev - 2 * g + 2
            if nplus1 < 1:
                continue
            table.W[(g, nplus1)] = recursion_step(g, nplus1 - 1, table)
        table.top_level = lev
    return table


# ---------------------------------------------------------------------------
# Alpha-dependence and free energies
# ---------------------------------------------------------------------------


def alpha_coefficients(g: int, n1: int, table: CorrelationTable) -> dict:
    """Per spectator key, ``sum_a Res F_a``: the coefficient multiplying ``P1(z_0 - alpha)``."""
    out: dict = {}
    for a in RESIDUE_POINTS:
        for key, F in table.integrands[(g, n1, a)].items():
            out[key] = out.get(key, 0) + F[-1]
    return out


def kernel_form_value(g: int, n1: int, table: CorrelationTable, z0, zs, alpha):
    """Evaluate ``sum_a Res K(z_0; z) R2W`` with the full kernel, including ``P1(z_0 - alpha)``.

    Numeric check of alpha-independence; uses the stored local integrands.
    """
    curve = table.curve
    cur = curve.num
    ctx = cur.ctx
    z0 = ctx.mpc(z0)
    total = ctx.mpc(0)
    for a in RESIDUE_POINTS:
        za = z0 - pole_point(a, curve)
        for key, F in table.integrands[(g, n1, a)].items():
            spect = ctx.mpc(1)
            for j, f in enumerate(key):
                if f is not None:
                    spect *= p_eval("P2d", ctx.mpc(zs[j]) - pole_point(f[0], curve), cur, f[1])
            # Res_t [P1(z0 - alpha) - P1(z0 - a - t)] F(t)
            val = (p_eval("P1", z0 - alpha, cur) - p_eval("P1", za, cur)) * curve.to_num(F[-1])
            kmax = -F.min_exp - 1
            if kmax >= 1:
                derivs = p_eval_list(za, kmax - 1, cur)
                for k in range(1, kmax + 1):
                    # P1(za - t) = P1(za) + sum_k (-t)^k / k! P2^(k-1)(za)
                    val -= (-1) ** k * derivs[k - 1] / math.factorial(k) * curve.to_num(F[-k - 1])
            total += spect * val
    return table.orientation * total


def p_eval_list(z, mmax: int, curve):
    from wtr.elliptic import p2_derivs

    return p2_derivs(z, mmax, curve)


def _phi_series(a, trunc: int, curve: CurveData, shift=0) -> LaurentSeries:
    """Local series of ``phi = (2/5) wp wp' + (2/5) g2 zeta - (3/5) g3 z`` up to constants.

    Constants multiply residue-free one-forms and are replaced by ``shift``.
    """
    from wtr.algebra import laurent_diff

    if a == 0:
        wp = p2_local(0, 0, trunc + 4, curve) - LaurentSeries.monomial(0, curve.G2, 0, trunc + 4)
    else:
        wp = wp_expand_at_halfperiod(a, trunc + 4, curve)
    wp1 = laurent_diff(wp)
    main = laurent_mul(wp, wp1).scale(mpq(2, 5))
    # zeta(a + t) - zeta(a) = -int_0^t wp  (origin: 1/t - int_0^t (wp - s^-2))
    coeffs = []
    lo = 0 if a != 0 else -1
    integ = {}
    for k in range(wp.min_exp, wp.trunc):
        if k == -2:
            integ[-1] = 1
            continue
        if k == -1:
            continue
        integ[k + 1] = -_div(wp[k], k + 1)
    zeta = LaurentSeries.make(a, lo, [integ.get(k, 0) for k in range(lo, wp.trunc + 1)], wp.trunc + 1)
    lin = LaurentSeries.make(a, 0, [shift, -_div(3 * curve.g3, 5)] + [0] * trunc, trunc + 2)
    phi = main + zeta.scale(_div(2 * curve.g2, 5)) + lin
    return phi.truncate(trunc)


def free_energy(g: int, table: CorrelationTable, shift=0):
    """``F_g = (1/(2-2g)) sum_a Res phi W_{g,1}`` for ``g >= 2``."""
    if g < 2:
        raise ValueError("free energies are defined here for g >= 2")
    curve = table.curve
    W = table.W[(g, 1)]
    total = 0
    for a in RESIDUE_POINTS:
        pw = pole_order_at(W, (0,), a)
        trunc = pw + 6
        ws = LaurentSeries.zero(a, trunc)
        for key, c in W.terms.items():
            ws = ws + term_series_at(key[0][0], key[0][1], a, trunc, curve).scale(c)
        if ws.trunc > -1 and ws[-1]:
            raise RecursionError("W_{g,1} has a nonzero residue")
        phi = _phi_series(a, trunc, curve, shift)
        total = total + laurent_mul(phi, ws)[-1]
    return _div(total, 2 - 2 * g) if not hasattr(total, "imag") else total / (2 - 2 * g)
