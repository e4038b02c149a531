"""Coefficient domains and truncated Laurent series.

Four scalar domains are supported:

* ``Rational``: ``gmpy2.mpq`` (plain ints are accepted wherever a rational is).
* :class:`CycOmega`: the field Q(w) with w^2 + w + 1 = 0.
* :class:`GammaField`: rational functions in a formal symbol ``g`` over Q(w).
* :class:`APComplex`: complex numbers carrying an explicit decimal precision.

:class:`LaurentSeries` stores a truncated expansion together with the first
exponent whose coefficient is not trusted.  Every operation recomputes that
bound, so a residue can never be read from an untrusted coefficient.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import mpmath
from gmpy2 import mpq

from wtr import kernels

Rational = mpq

_RATIONAL_TYPES = (int, type(mpq(0)))


def as_rational(x) -> mpq:
    if isinstance(x, _RATIONAL_TYPES):
        return mpq(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpq(x.numerator, x.denominator)
    raise TypeError(f"not a rational: {x!r}")


def rational_str(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Q(w)
# ---------------------------------------------------------------------------


class CycOmega:
    """``a + b*w`` with rational ``a, b`` and ``w = exp(2 pi i / 3)``."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = mpq(a)
        self.b = mpq(b)

    @classmethod
    def w(cls) -> "CycOmega":
        return cls(0, 1)

    @staticmethod
    def _coerce(other):
        if isinstance(other, CycOmega):
            return other
        if isinstance(other, _RATIONAL_TYPES):
            return CycOmega(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycOmega(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycOmega(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycOmega(o.a - self.a, o.b - self.b)

    def __neg__(self):
        return CycOmega(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            return CycOmega(self.a * other, self.b * other)
        if not isinstance(other, CycOmega):
            return NotImplemented
        a, b, c, d = self.a, self.b, other.a, other.b
        bd = b * d
        # (a + bw)(c + dw) = ac + (ad + bc) w + bd w^2,  w^2 = -1 - w
        return CycOmega(a * c - bd, a * d + b * c - bd)

    __rmul__ = __mul__

    def conj(self) -> "CycOmega":
        """Galois conjugate ``w -> w^2``."""
        return CycOmega(self.a - self.b, -self.b)

    def norm(self) -> mpq:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def inverse(self) -> "CycOmega":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(w)")
        c = self.conj()
        return CycOmega(c.a / n, c.b / n)

    def __truediv__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(w)")
            return CycOmega(self.a / other, self.b / other)
        if not isinstance(other, CycOmega):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = CycOmega(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def to_complex(self, ctx=mpmath.mp):
        s3 = ctx.sqrt(3)
        re_ = ctx.mpf(self.a.numerator) / self.a.denominator - ctx.mpf(self.b.numerator) / (2 * self.b.denominator)
        im_ = ctx.mpf(self.b.numerator) / self.b.denominator * s3 / 2
        return ctx.mpc(re_, im_)

    def __str__(self):
        if self.b == 0:
            return rational_str(self.a)
        if self.a == 0:
            return f"{rational_str(self.b)}*w"
        bs = rational_str(self.b)
        sign = "" if bs.startswith("-") else "+"
        return f"{rational_str(self.a)}{sign}{bs}*w"

    def __repr__(self):
        return f"CycOmega({rational_str(self.a)}, {rational_str(self.b)})"


def omega_normalize(e) -> CycOmega:
    """Reduce a formal polynomial in ``w`` to canonical ``a + b*w``.

    ``e`` is either a :class:`CycOmega`, a rational, or a sequence of
    coefficients ``[c0, c1, c2, ...]`` meaning ``sum c_k w^k``.
    """
    if isinstance(e, CycOmega):
        return CycOmega(e.a, e.b)
    if isinstance(e, _RATIONAL_TYPES):
        return CycOmega(e)
    powers = (CycOmega(1), CycOmega(0, 1), CycOmega(-1, -1))
    out = CycOmega()
    for k, c in enumerate(e):
        out = out + powers[k % 3] * as_rational(c)
    return out


# ---------------------------------------------------------------------------
# Polynomials in g over Q(w), and their fraction field
# ---------------------------------------------------------------------------

_ZERO = CycOmega()
_ONE = CycOmega(1)


def _ptrim(p: Sequence[CycOmega]) -> tuple:
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return tuple(p)


def _padd(p, q):
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] = out[i] + c
    return _ptrim(out)


def _pneg(p):
    return tuple(-c for c in p)


def _pmul(p, q):
    if not p or not q:
        return ()
    out = [_ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] = out[i + j] + a * b
    return _ptrim(out)


def _pscale(p, c):
    if not c:
        return ()
    return _ptrim(a * c for a in p)


def _pdivmod(p, q):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    p = list(p)
    lead_inv = q[-1].inverse()
    quot = [_ZERO] * max(len(p) - len(q) + 1, 0)
    while len(p) >= len(q) and p:
        k = len(p) - len(q)
        c = p[-1] * lead_inv
        quot[k] = c
        for i, b in enumerate(q):
            p[i + k] = p[i + k] - c * b
        p = list(_ptrim(p))
    return _ptrim(quot), _ptrim(p)


def _pgcd(p, q):
    while q:
        p, q = q, _pdivmod(p, q)[1]
    if not p:
        return ()
    return _pscale(p, p[-1].inverse())


class GammaField:
    """Reduced ratio ``num(g)/den(g)`` with ``den`` monic, coefficients in Q(w).

    ``g`` stands for the transcendental constant G2 at the special modulus.
    """

    __slots__ = ("num", "den")

    def __init__(self, num=(), den=(_ONE,), *, _reduced=False):
        num = _ptrim(omega_normalize(c) if not isinstance(c, CycOmega) else c for c in num)
        den = _ptrim(omega_normalize(c) if not isinstance(c, CycOmega) else c for c in den)
        if not den:
            raise ZeroDivisionError("GammaField denominator is zero")
        if not _reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c) -> "GammaField":
        c = omega_normalize(c) if not isinstance(c, CycOmega) else c
        return cls((c,) if c else (), (_ONE,), _reduced=True)

    @classmethod
    def gamma(cls) -> "GammaField":
        return cls((_ZERO, _ONE), (_ONE,), _reduced=True)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GammaField):
            return other
        if isinstance(other, (CycOmega,) + _RATIONAL_TYPES):
            return GammaField.const(other)
        return None

    def _is_poly(self):
        return len(self.den) == 1

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self._is_poly() and o._is_poly():
            return GammaField(_padd(self.num, o.num), (_ONE,), _reduced=True)
        num = _padd(_pmul(self.num, o.den), _pmul(o.num, self.den))
        return GammaField(num, _pmul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return GammaField(_pneg(self.num), self.den, _reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (CycOmega,) + _RATIONAL_TYPES):
            c = other if isinstance(other, CycOmega) else CycOmega(other)
            return GammaField(_pscale(self.num, c), self.den, _reduced=True)
        if not isinstance(other, GammaField):
            return NotImplemented
        if self._is_poly() and other._is_poly():
            return GammaField(_pmul(self.num, other.num), (_ONE,), _reduced=True)
        return GammaField(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "GammaField":
        if not self.num:
            raise ZeroDivisionError("division by zero in GammaField")
        return GammaField(self.den, self.num)

    def __truediv__(self, other):
        if isinstance(other, (CycOmega,) + _RATIONAL_TYPES):
            c = other if isinstance(other, CycOmega) else CycOmega(other)
            return GammaField(_pscale(self.num, c.inverse()), self.den, _reduced=True)
        if not isinstance(other, GammaField):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = GammaField.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._is_poly() and len(self.num) <= 1:
            return hash(self.num[0]) if self.num else hash(0)
        return hash((self.num, self.den))

    def __bool__(self):
        return bool(self.num)

    def degree(self) -> int:
        return len(self.num) - 1

    def evaluate(self, gamma_value, ctx=mpmath.mp):
        def ev(p):
            acc = ctx.mpc(0)
            for c in reversed(p):
                acc = acc * gamma_value + c.to_complex(ctx)
            return acc

        return ev(self.num) / ev(self.den)

    def to_complex(self, ctx=mpmath.mp, gamma_value=None):
        if gamma_value is None:
            if len(self.num) > 1 or len(self.den) > 1:
                raise ValueError("a numeric value for g is required")
            gamma_value = 0
        return self.evaluate(gamma_value, ctx)

    def __str__(self):
        n = _poly_str(self.num)
        if self._is_poly():
            return n
        return f"({n})/({_poly_str(self.den)})"

    def __repr__(self):
        return f"GammaField({self})"


def _reduce(num, den):
    if not num:
        return (), (_ONE,)
    g = _pgcd(num, den)
    if len(g) > 1:
        num = _pdivmod(num, g)[0]
        den = _pdivmod(den, g)[0]
    lead_inv = den[-1].inverse()
    return _pscale(num, lead_inv), _pscale(den, lead_inv)


def gamma_reduce(r: GammaField) -> GammaField:
    """Return ``r`` in reduced form (coprime numerator/denominator, monic denominator)."""
    return GammaField(r.num, r.den)


def _poly_str(p) -> str:
    if not p:
        return "0"
    parts = []
    for k, c in enumerate(p):
        if not c:
            continue
        cs = str(c)
        if c.b != 0 and c.a != 0:
            cs = f"({cs})"
        mono = "" if k == 0 else ("g" if k == 1 else f"g^{k}")
        if not mono:
            parts.append(cs)
        elif cs == "1":
            parts.append(mono)
        elif cs == "-1":
            parts.append(f"-{mono}")
        else:
            parts.append(f"{cs}*{mono}")
    s = "+".join(parts)
    return s.replace("+-", "-")


_TERM_RE = re.compile(r"^(?:(?P<coef>.+?)\*)?(?P<mono>-?g(?:\^(?P<pow>\d+))?)$")


def _split_top(s: str, seps: str) -> list[str]:
    """Split ``s`` on top-level sign characters, keeping the sign on each piece."""
    out, depth, cur = [], 0, ""
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in seps and depth == 0 and i > 0 and s[i - 1] not in "*/^(":
            out.append(cur)
            cur = "" if ch == "+" else "-"
            continue
        cur += ch
    out.append(cur)
    return [p for p in out if p]


def parse_cyc(s: str) -> CycOmega:
    s = s.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    out = CycOmega()
    for part in _split_top(s, "+-"):
        if part.endswith("*w"):
            out = out + CycOmega(0, mpq(part[:-2]))
        elif part in ("w", "-w"):
            out = out + CycOmega(0, -1 if part.startswith("-") else 1)
        else:
            out = out + CycOmega(mpq(part))
    return out


def _parse_poly(s: str) -> tuple:
    s = s.strip()
    if s == "0":
        return ()
    coeffs: dict[int, CycOmega] = {}
    for part in _split_top(s, "+-"):
        m = _TERM_RE.match(part)
        if m and "g" in part:
            k = int(m.group("pow") or 1)
            neg = m.group("mono").startswith("-")
            c = parse_cyc(m.group("coef")) if m.group("coef") else CycOmega(1)
            if neg:
                c = -c
        else:
            k, c = 0, parse_cyc(part)
        coeffs[k] = coeffs.get(k, _ZERO) + c
    top = max(coeffs) if coeffs else -1
    return _ptrim(coeffs.get(k, _ZERO) for k in range(top + 1))


def parse_gamma(s: str) -> GammaField:
    """Inverse of ``str(GammaField)``."""
    s = s.strip()
    m = re.match(r"^\((.*)\)/\((.*)\)$", s)
    if m:
        return GammaField(_parse_poly(m.group(1)), _parse_poly(m.group(2)))
    return GammaField(_parse_poly(s), (_ONE,), _reduced=True)


# ---------------------------------------------------------------------------
# Arbitrary-precision complex numbers
# ---------------------------------------------------------------------------

DEFAULT_PRECISION = 60


class APComplex:
    """Complex number with an explicit precision in significant decimal digits.

    Binary operations run at the smaller of the two precisions and the result
    records it.
    """

    __slots__ = ("value", "prec")

    def __init__(self, value, prec: int = DEFAULT_PRECISION):
        with mpmath.workdps(prec):
            self.value = mpmath.mpc(value)
        self.prec = int(prec)

    def _binop(self, other, fn):
        if isinstance(other, APComplex):
            prec = min(self.prec, other.prec)
            ov = other.value
        else:
            prec, ov = self.prec, other
        with mpmath.workdps(prec):
            return APComplex(fn(self.value, ov), prec)

    def __add__(self, o):
        return self._binop(o, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, o):
        return self._binop(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binop(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binop(o, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._binop(o, lambda a, b: a / b)

    def __rtruediv__(self, o):
        return self._binop(o, lambda a, b: b / a)

    def __neg__(self):
        return APComplex(-self.value, self.prec)

    def __abs__(self):
        with mpmath.workdps(self.prec):
            return mpmath.fabs(self.value)

    def __eq__(self, other):
        if isinstance(other, APComplex):
            return self.value == other.value
        return self.value == other

    def __hash__(self):
        return hash((self.value.real, self.value.imag))

    def __bool__(self):
        return bool(self.value)

    def to_strings(self) -> list[str]:
        with mpmath.workdps(self.prec):
            return [mpmath.nstr(self.value.real, self.prec), mpmath.nstr(self.value.imag, self.prec)]

    def __repr__(self):
        re_, im_ = self.to_strings()
        return f"APComplex({re_}, {im_}; prec={self.prec})"


# ---------------------------------------------------------------------------
# Domain tags
# ---------------------------------------------------------------------------


def domain_of(x) -> str:
    if isinstance(x, _RATIONAL_TYPES):
        return "Rational"
    if isinstance(x, CycOmega):
        return "CycOmega"
    if isinstance(x, GammaField):
        return "GammaField"
    if isinstance(x, APComplex):
        return "APComplex"
    if isinstance(x, (mpmath.mpc, mpmath.mpf, complex, float)) or type(x).__name__ in ("mpc", "mpf"):
        return "APComplex"
    return type(x).__name__


def _compatible(d1: str, d2: str) -> bool:
    # Q embeds in every other domain.
    return d1 == d2 or "Rational" in (d1, d2) or {d1, d2} == {"CycOmega", "GammaField"}


def is_zero(x) -> bool:
    return not x


# ---------------------------------------------------------------------------
# Truncated Laurent series
# ---------------------------------------------------------------------------


class SeriesError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """``sum_{k=min_exp}^{trunc-1} coeffs[k-min_exp] t^k + O(t^trunc)`` about ``point``."""

    point: Any
    min_exp: int
    coeffs: tuple
    trunc: int

    def __post_init__(self):
        if len(self.coeffs) != self.trunc - self.min_exp:
            raise SeriesError("coefficient count does not match the trusted range")

    @classmethod
    def make(cls, point, min_exp: int, coeffs: Iterable, trunc: int | None = None) -> "LaurentSeries":
        coeffs = list(coeffs)
        if trunc is None:
            trunc = min_exp + len(coeffs)
        coeffs = coeffs[: max(trunc - min_exp, 0)]
        while len(coeffs) < trunc - min_exp:
            coeffs.append(0)
        # strip exact leading zeros
        k = 0
        while k < len(coeffs) and is_zero(coeffs[k]):
            k += 1
        if k == len(coeffs):
            return cls(point, trunc, (), trunc)
        return cls(point, min_exp + k, tuple(coeffs[k:]), trunc)

    @classmethod
    def zero(cls, point, trunc: int) -> "LaurentSeries":
        return cls(point, trunc, (), trunc)

    @classmethod
    def monomial(cls, point, c, k: int, trunc: int) -> "LaurentSeries":
        if k >= trunc:
            return cls.zero(point, trunc)
        return cls.make(point, k, [c] + [0] * (trunc - k - 1), trunc)

    def is_zero(self) -> bool:
        return not self.coeffs

    def domain(self) -> str:
        for c in self.coeffs:
            d = domain_of(c)
            if d != "Rational":
                return d
        return "Rational"

    def __getitem__(self, k: int):
        if k >= self.trunc:
            raise SeriesError(f"coefficient t^{k} is beyond the trusted range (trunc={self.trunc})")
        if k < self.min_exp:
            return 0
        return self.coeffs[k - self.min_exp]

    def _check(self, other: "LaurentSeries"):
        if self.point != other.point:
            raise SeriesError(f"expansion point mismatch: {self.point!r} vs {other.point!r}")
        if self.coeffs and other.coeffs and not _compatible(self.domain(), other.domain()):
            raise SeriesError(f"domain mismatch: {self.domain()} vs {other.domain()}")

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.monomial(self.point, other, 0, max(self.trunc, 1)) if other else LaurentSeries.zero(self.point, self.trunc)
        self._check(other)
        trunc = min(self.trunc, other.trunc)
        lo = min(self.min_exp, other.min_exp)
        if lo >= trunc:
            return LaurentSeries.zero(self.point, trunc)
        out = [0] * (trunc - lo)
        for k, c in enumerate(self.coeffs):
            e = self.min_exp + k
            if e < trunc:
                out[e - lo] = c
        for k, c in enumerate(other.coeffs):
            e = other.min_exp + k
            if e < trunc:
                out[e - lo] = out[e - lo] + c
        return LaurentSeries.make(self.point, lo, out, trunc)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.point, self.min_exp, tuple(-c for c in self.coeffs), self.trunc)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LaurentSeries":
        if not c:
            return LaurentSeries.zero(self.point, self.trunc)
        return LaurentSeries.make(self.point, self.min_exp, [x * c for x in self.coeffs], self.trunc)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        return laurent_mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by ``t^k``."""
        return LaurentSeries(self.point, self.min_exp + k, self.coeffs, self.trunc + k)

    def truncate(self, trunc: int) -> "LaurentSeries":
        if trunc >= self.trunc:
            return self
        return LaurentSeries.make(self.point, self.min_exp, self.coeffs[: max(trunc - self.min_exp, 0)], trunc)

    def valuation(self) -> int:
        return self.min_exp

    def evaluate(self, t):
        acc = 0
        for k, c in enumerate(self.coeffs):
            acc = acc + c * t ** (self.min_exp + k)
        return acc

    def __repr__(self):
        return f"LaurentSeries(point={self.point!r}, min_exp={self.min_exp}, coeffs={list(self.coeffs)!r}, trunc={self.trunc})"


def laurent_mul(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    f._check(g)
    trunc = min(f.trunc + g.min_exp, g.trunc + f.min_exp)
    lo = f.min_exp + g.min_exp
    n = trunc - lo
    if n <= 0 or not f.coeffs or not g.coeffs:
        return LaurentSeries.zero(f.point, trunc)
    return LaurentSeries.make(f.point, lo, kernels.cauchy_product(f.coeffs, g.coeffs, n), trunc)


def laurent_inv(f: LaurentSeries) -> LaurentSeries:
    if not f.coeffs:
        raise SeriesError("cannot invert a series that vanishes to truncation order")
    lead = f.coeffs[0]
    if not lead:
        raise SeriesError("zero leading coefficient")
    n = f.trunc - f.min_exp
    inv_lead = 1 / lead if not isinstance(lead, _RATIONAL_TYPES) else mpq(1) / lead
    coeffs = kernels.series_inverse(f.coeffs, n, inv_lead)
    return LaurentSeries.make(f.point, -f.min_exp, coeffs, -f.min_exp + n)


def laurent_diff(f: LaurentSeries) -> LaurentSeries:
    out = [(f.min_exp + k) * c for k, c in enumerate(f.coeffs)]
    lo = f.min_exp - 1
    if f.min_exp == 0 and out:
        out = out[1:]
        lo = 0
    return LaurentSeries.make(f.point, lo, out, f.trunc - 1)


def laurent_residue(f: LaurentSeries):
    return f[-1]


def laurent_negate_arg(f: LaurentSeries) -> LaurentSeries:
    return LaurentSeries(
        f.point,
        f.min_exp,
        tuple(c if (f.min_exp + k) % 2 == 0 else -c for k, c in enumerate(f.coeffs)),
        f.trunc,
    )


def laurent_pow(f: LaurentSeries, k: int) -> LaurentSeries:
    if k < 0:
        return laurent_pow(laurent_inv(f), -k)
    out = LaurentSeries.monomial(f.point, 1, 0, f.trunc - f.min_exp)
    base = f
    while k:
        if k & 1:
            out = laurent_mul(out, base)
        k >>= 1
        if k:
            base = laurent_mul(base, base)
    return out
