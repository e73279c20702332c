"""Backend selection for the hot loops.

The compiled extension ``_core`` is used when it imports; otherwise, or when
``OTKIT_PURE_PYTHON=1`` is set, the reference module ``_pycore`` is used.
``BACKEND`` names the active one.
"""
from __future__ import annotations

import os

from . import _pycore

if os.environ.get("OTKIT_PURE_PYTHON", "").strip() in ("1", "true", "yes"):
    _impl = _pycore
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        _impl = _pycore

BACKEND = "cython" if _impl is not _pycore else "python"

STATUS_OPTIMAL = _pycore.STATUS_OPTIMAL
STATUS_MAXITER = _pycore.STATUS_MAXITER

transport_simplex = _impl.transport_simplex
polygon_grid_moments = _impl.polygon_grid_moments
segment_grid_integral = _impl.segment_grid_integral
power_cell = _impl.power_cell
laguerre_cells = _impl.laguerre_cells

# pure-Python helpers with no compiled twin
clip_halfplane = _pycore.clip_halfplane
polygon_moments = _pycore.polygon_moments


def get_backend(name: str):
    """Return the kernel module called ``name`` ("python" or "cython")."""
    if name == "python":
        return _pycore
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
