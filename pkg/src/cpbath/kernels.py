"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; set
``CPBATH_PURE_PYTHON=1`` to force the NumPy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("CPBATH_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
ST_DONE = _impl.ST_DONE
ST_CHART = _impl.ST_CHART
ST_UNDERFLOW = _impl.ST_UNDERFLOW
ST_SINGULAR = _impl.ST_SINGULAR
ST_MAXSTEPS = _impl.ST_MAXSTEPS

isolated_rhs = _impl.isolated_rhs
cp_rhs = _impl.cp_rhs
bath_rhs = _impl.bath_rhs
advance_cp = _impl.advance_cp
advance_bath = _impl.advance_bath
rk4_cp = _impl.rk4_cp


def available_backends():
    """Backend modules importable in this environment, by name."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
