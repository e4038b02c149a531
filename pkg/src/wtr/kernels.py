"""Kernel dispatch: the compiled extension when it was built, otherwise pure Python."""

import os

BACKEND = "python"

if os.environ.get("WTR_PURE_PYTHON") != "1":
    try:
        from wtr._kernels import cauchy_product, lambert_sum, p2_double, series_inverse

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from wtr._kernels_py import cauchy_product, lambert_sum, p2_double, series_inverse

__all__ = ["BACKEND", "cauchy_product", "series_inverse", "lambert_sum", "p2_double"]
