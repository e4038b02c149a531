"""Pure-Python versions of the hot loops.  Must agree with ``_kernels.pyx``."""

import cmath


def cauchy_product(a, b, n):
    """First ``n`` coefficients of the product of two coefficient sequences."""
    la, lb = len(a), len(b)
    out = [0] * n
    for k in range(n):
        acc = 0
        lo = k - lb + 1
        if lo < 0:
            lo = 0
        hi = k if k < la - 1 else la - 1
        for i in range(lo, hi + 1):
            x = a[i]
            if x:
                y = b[k - i]
                if y:
                    acc = acc + x * y
        out[k] = acc
    return out


def series_inverse(a, n, inv_lead):
    """First ``n`` coefficients of ``1/sum a_k t^k`` given ``1/a_0``."""
    la = len(a)
    out = [0] * n
    if n == 0:
        return out
    out[0] = inv_lead
    for k in range(1, n):
        acc = 0
        hi = k if k < la - 1 else la - 1
        for i in range(1, hi + 1):
            x = a[i]
            if x:
                acc = acc + x * out[k - i]
        out[k] = -acc * inv_lead
    return out


def lambert_sum(q, power, nterms):
    """``sum_{n=1}^{nterms} n^power q^n / (1 - q^n)`` in double precision."""
    q = complex(q)
    acc = 0j
    qn = 1 + 0j
    for n in range(1, nterms + 1):
        qn *= q
        acc += (n ** power) * qn / (1 - qn)
    return acc


def p2_double(z, tau, nterms):
    """Double-precision ``P2(z) = wp(z) + G2`` on the lattice ``Z + tau Z``."""
    twopii = 2j * cmath.pi
    q = cmath.exp(twopii * tau)
    x = cmath.exp(twopii * z)
    acc = x / (1 - x) ** 2
    qk = 1 + 0j
    for _ in range(1, nterms + 1):
        qk *= q
        u = qk * x
        v = qk / x
        acc += u / (1 - u) ** 2 + v / (1 - v) ** 2
    return twopii * twopii * acc
