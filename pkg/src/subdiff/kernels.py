"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise, or when the
environment variable SUBDIFF_PURE_PYTHON=1 is set, the numpy fallback is.
"""
import os

from . import _kernels_py

if os.environ.get("SUBDIFF_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"

hankel_sum = _impl.hankel_sum
circle_mean = _impl.circle_mean
datum_values = _impl.datum_values

DATUM_KIND = {"gaussian": 0, "smooth_bump": 1, "power_tail": 2, "ball_indicator": 3}
