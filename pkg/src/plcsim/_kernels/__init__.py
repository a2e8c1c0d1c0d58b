"""Hot linear-algebra kernels with a compiled core and a numpy fallback.

The compiled extension is picked at import time when it was built; setting
``PLCSIM_PURE_PYTHON=1`` forces the fallback. ``BACKEND`` names the active one.
"""

from __future__ import annotations

import os

from . import _rref_py

try:  # pragma: no cover - depends on the build
    if os.environ.get("PLCSIM_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernels disabled by PLCSIM_PURE_PYTHON")
    from . import _rref_cy as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
rref_inplace = _compiled.rref_inplace if _compiled is not None else _rref_py.rref_inplace


def available_backends() -> dict:
    """Map backend name to its ``rref_inplace`` implementation."""
    out = {"python": _rref_py.rref_inplace}
    if _compiled is not None:
        out["cython"] = _compiled.rref_inplace
    return out


__all__ = ["BACKEND", "available_backends", "rref_inplace"]
