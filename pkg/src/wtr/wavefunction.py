"""Perturbative wave-function and two operators that annihilate it order by order.

``psi = exp(sum_k hbar^(k-1) S_k)``.  Every ``S_k`` is handled through its
z-derivatives; additive constants drop out of both operators.  Correlators are
normalised to the literal residue orientation (see
:func:`wtr.identities.literal_sign`), and a slot evaluated at ``-u`` inside
``G-hat`` carries its Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from wtr.basis import basis_primitive_value, pole_point
from wtr.elliptic import p2_derivs, p_eval
from wtr.identities import b_loop_integral, literal_sign
from wtr.recursion import CorrelationTable, is_stable

__all__ = [
    "OperatorResidual",
    "PertWave",
    "specialized_value",
    "ghat_zero_term",
    "b_integral_specialized",
    "collect_orders",
    "operator_check_A",
    "operator_check_B",
]

MAX_ORDER = 5


@dataclass
class OperatorResidual:
    """Residual of one operator at one hbar order and one point."""

    operator: str
    order: int
    point: complex
    value: complex


def specialized_value(table: CorrelationTable, g: int, n: int, z, modes: list):
    """``w_{g,n}`` with every slot tied to the single point ``z``.

    ``modes[j]`` chooses what slot ``j`` contributes for a factor ``P2^(m)(u - p)``:
    ``"val"`` its value at ``u = z``, ``"neg"`` at ``u = -z``, ``"d"`` the
    ``u``-derivative at ``z``, ``"prim"`` the primitive from 0 to ``z``, ``"zero"``
    the value at ``u = 0``.
    """
    curve = table.curve
    cur = curve.num
    ctx = cur.ctx
    z = ctx.mpc(z)
    cache: dict = {}

    def factor(mode, s):
        key = (mode, s)
        if key in cache:
            return cache[key]
        p, m = s
        pt = pole_point(p, curve)
        if mode == "val":
            v = p2_derivs(z - pt, m, cur)[m]
        elif mode == "neg":
            v = p2_derivs(-z - pt, m, cur)[m]
        elif mode == "d":
            v = p2_derivs(z - pt, m + 1, cur)[m + 1]
        elif mode == "prim":
            v = basis_primitive_value(s, z, curve)
        elif mode == "zero":
            v = p2_derivs(-pt, m, cur)[m]
        else:
            raise ValueError(f"unknown slot mode {mode!r}")
        cache[key] = v
        return v

    acc = ctx.mpc(0)
    for key, c in table.W[(g, n)].terms.items():
        prod = curve.to_num(c)
        for mode, s in zip(modes, key):
            prod = prod * factor(mode, s)
        acc += prod
    return literal_sign(table, g, n) * acc


def _s_terms(k: int):
    """Stable ``(g, n)`` with ``2g - 1 + n = k`` and ``n >= 1``."""
    return [(g, k + 1 - 2 * g) for g in range(0, k // 2 + 1) if k + 1 - 2 * g >= 1 and is_stable(g, k + 1 - 2 * g)]


class PertWave:
    """z-derivatives of the ``S_k`` of the perturbative wave-function.

    Parameters
    ----------
    table : CorrelationTable
        Must reach level ``kmax - 1``.
    kmax : int
        Highest ``k`` needed.
    """

    def __init__(self, table: CorrelationTable, kmax: int):
        if kmax >= 2 and table.top_level < kmax - 1:
            raise ValueError(f"S_{kmax} needs correlators up to level {kmax - 1}")
        self.table = table
        self.kmax = kmax

    def z_derivs(self, k: int, z):
        """``(dS_k/dz, d^2 S_k/dz^2)`` at ``z``."""
        cur = self.table.curve.num
        z = cur.ctx.mpc(z)
        if k == 0:
            d1 = p_eval("wp1", z, cur)
            return d1**2, 2 * d1 * p_eval("P2d", z, cur, 2)
        if k == 1:
            # half the regularised two-point double integral
            return (
                p_eval("P1", 2 * z, cur) - p_eval("P1", z, cur),
                2 * p_eval("P2", 2 * z, cur) - p_eval("P2", z, cur),
            )
        s1 = s2 = 0
        for g, n in _s_terms(k):
            f = math.factorial(n - 1)
            s1 += specialized_value(self.table, g, n, z, ["val"] + ["prim"] * (n - 1)) / f
            s2 += specialized_value(self.table, g, n, z, ["d"] + ["prim"] * (n - 1)) / f
            if n >= 2:
                s2 += (n - 1) * specialized_value(self.table, g, n, z, ["val", "val"] + ["prim"] * (n - 2)) / f
        return s1, s2

    def x_derivs(self, k: int, z):
        """``(dS_k/dx, d^2 S_k/dx^2)`` with ``x = wp(z)``."""
        cur = self.table.curve.num
        d1 = p_eval("wp1", z, cur)
        d2 = p_eval("P2d", z, cur, 2)
        s1, s2 = self.z_derivs(k, z)
        return s1 / d1, (s2 - s1 * d2 / d1) / d1**2


def collect_orders(first: list, second: list, order: int) -> list:
    """Coefficients of ``hbar^0..hbar^order`` in ``hbar^2 psi''/psi``.

    ``first[k]`` and ``second[k]`` are ``S_k'`` and ``S_k''``; the ansatz
    ``psi = exp(sum hbar^(k-1) S_k)`` gives ``sum_{i+j=m} S_i' S_j' + S_{m-1}''``.
    """
    out = []
    for m in range(order + 1):
        v = sum(first[i] * first[m - i] for i in range(m + 1))
        if m >= 1:
            v += second[m - 1]
        out.append(v)
    return out


def ghat_zero_term(g: int, n: int, z, table: CorrelationTable):
    """``(G-hat_{g,n+1}(z'; z)/dz')`` at ``z' = 0``.

    First slot of ``W_{g,n+1}`` at ``-z'`` (Jacobian ``-1``), the other ``n``
    slots integrated from 0 to ``z``.
    """
    return -specialized_value(table, g, n + 1, z, ["zero"] + ["prim"] * n)


def _psi_specialized(table, g, n, z):
    """``w_{g,n}(-z, rest) / (2 wp'(z)^2)`` with the ``n - 1`` other slots integrated to ``z``."""
    cur = table.curve.num
    if (g, n) == (0, 2):
        w = p_eval("P1", 2 * z, cur) - p_eval("P1", z, cur)
    else:
        w = specialized_value(table, g, n, z, ["neg"] + ["prim"] * (n - 1))
    return w / (2 * p_eval("wp1", z, cur) ** 2)


def b_integral_specialized(g: int, n: int, z, table: CorrelationTable):
    """``int_0^z ... int_0^z B_{g,n+1}``, all ``n`` spectators specialised to ``z``.

    For ``n = 0`` this is the constant :func:`wtr.identities.b_loop_integral`.
    Otherwise the integrand is rewritten with the identity tower,
    ``B = -w_{g,n+1}(0, .) + sum_i d/dz_i [2 P1(z_i) psi_i]``; the total
    derivatives integrate to boundary terms at ``z`` (those at 0 vanish, since
    ``psi`` has a zero of order 6 there).
    """
    if n == 0:
        return table.curve.to_num(b_loop_integral(g, 0, table))
    cur = table.curve.num
    z = cur.ctx.mpc(z)
    elliptic = -specialized_value(table, g, n + 1, z, ["zero"] + ["prim"] * n)
    boundary = n * 2 * p_eval("P1", z, cur) * _psi_specialized(table, g, n, z)
    return elliptic + boundary


def _operator_terms(order: int):
    """``(g, n)`` with ``2g - 2 + n >= 0`` and ``2g + n <= order``, grouped by ``2g + n``."""
    out: dict = {}
    for m in range(2, order + 1):
        out[m] = [(g, m - 2 * g) for g in range(0, m // 2 + 1) if 2 * g - 2 + (m - 2 * g) >= 0]
    return out


def _check_order(order: int, table: CorrelationTable):
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must lie in 0..{MAX_ORDER}")
    if order >= 2 and table.top_level < order - 1:
        raise ValueError(f"order {order} needs correlators up to level {order - 1}")


def _series(wave: PertWave, z, order: int):
    firsts, seconds = [], []
    for k in range(order + 1):
        a, b = wave.x_derivs(k, z)
        firsts.append(a)
        seconds.append(b)
    return firsts, seconds


def operator_residuals_A(order: int, z, table: CorrelationTable) -> list:
    """Order-by-order residual of
    ``hbar^2 d^2/dx^2 - 4x^3 + g2 x + g3 - 2 hbar P1 + 2 sum hbar^(2g+n)/n! G-hat``.
    """
    _check_order(order, table)
    cur = table.curve.num
    z = cur.ctx.mpc(z)
    wave = PertWave(table, order)
    firsts, seconds = _series(wave, z, order)
    res = collect_orders(firsts, seconds, order)
    x = p_eval("wp", z, cur)
    res[0] -= 4 * x**3 - cur.g2 * x - cur.g3
    if order >= 1:
        res[1] -= 2 * p_eval("P1", z, cur)
    for m, gns in _operator_terms(order).items():
        for g, n in gns:
            res[m] += 2 * ghat_zero_term(g, n, z, table) / math.factorial(n)
    return res


def operator_residuals_B(order: int, z, table: CorrelationTable) -> list:
    """Order-by-order residual of
    ``hbar^2 d^2/dx^2 - 2 hbar^2 (P1/wp') d/dx - 4x^3 + g2 x + g3 + 2 sum hbar^(2g+n)/n! int..int B``.

    ``B`` is :func:`wtr.identities.b_loop_value`, whose integrand keeps the
    Jacobian of the flipped slot; read without it, ``B`` changes sign and the
    last term becomes ``-2 sum ...``.
    """
    _check_order(order, table)
    cur = table.curve.num
    z = cur.ctx.mpc(z)
    wave = PertWave(table, order)
    firsts, seconds = _series(wave, z, order)
    res = collect_orders(firsts, seconds, order)
    x = p_eval("wp", z, cur)
    res[0] -= 4 * x**3 - cur.g2 * x - cur.g3
    ratio = p_eval("P1", z, cur) / p_eval("wp1", z, cur)
    for m in range(1, order + 1):
        res[m] -= 2 * ratio * firsts[m - 1]
    for m, gns in _operator_terms(order).items():
        for g, n in gns:
            res[m] += 2 * b_integral_specialized(g, n, z, table) / math.factorial(n)
    return res


def operator_check_A(order: int, samples, table: CorrelationTable) -> list:
    """:class:`OperatorResidual` for every order ``0..order`` and sample point."""
    out = []
    for z in samples:
        for m, v in enumerate(operator_residuals_A(order, z, table)):
            out.append(OperatorResidual("A", m, z, v))
    return out


def operator_check_B(order: int, samples, table: CorrelationTable) -> list:
    out = []
    for z in samples:
        for m, v in enumerate(operator_residuals_B(order, z, table)):
            out.append(OperatorResidual("B", m, z, v))
    return out
