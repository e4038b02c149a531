"""Compiled versions of the hot loops in ``_kernels_py``."""

from libc.math cimport M_PI


def cauchy_product(a, b, Py_ssize_t n):
    cdef Py_ssize_t la = len(a), lb = len(b), k, i, lo, hi
    cdef list out = [0] * n
    cdef list la_ = list(a), lb_ = list(b)
    for k in range(n):
        acc = 0
        lo = k - lb + 1
        if lo < 0:
            lo = 0
        hi = k if k < la - 1 else la - 1
        for i in range(lo, hi + 1):
            x = la_[i]
            if x:
                y = lb_[k - i]
                if y:
                    acc = acc + x * y
        out[k] = acc
    return out


def series_inverse(a, Py_ssize_t n, inv_lead):
    cdef Py_ssize_t la = len(a), k, i, hi
    cdef list a_ = list(a)
    cdef list out = [0] * n
    if n == 0:
        return out
    out[0] = inv_lead
    for k in range(1, n):
        acc = 0
        hi = k if k < la - 1 else la - 1
        for i in range(1, hi + 1):
            x = a_[i]
            if x:
                acc = acc + x * out[k - i]
        out[k] = -acc * inv_lead
    return out


def lambert_sum(q, int power, int nterms):
    cdef double complex qq = q
    cdef double complex acc = 0
    cdef double complex qn = 1
    cdef int n
    for n in range(1, nterms + 1):
        qn = qn * qq
        acc = acc + (<double>n) ** power * qn / (1 - qn)
    return complex(acc)


def p2_double(z, tau, int nterms):
    cdef double complex twopii = 2j * M_PI
    cdef double complex zz = z, tt = tau
    cdef double complex q, x, acc, qk, u, v
    cdef int k
    from cmath import exp
    q = exp(twopii * tt)
    x = exp(twopii * zz)
    acc = x / ((1 - x) * (1 - x))
    qk = 1
    for k in range(1, nterms + 1):
        qk = qk * q
        u = qk * x
        v = qk / x
        acc = acc + u / ((1 - u) * (1 - u)) + v / ((1 - v) * (1 - v))
    return complex(twopii * twopii * acc)
