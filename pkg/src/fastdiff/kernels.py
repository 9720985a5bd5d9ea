"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
implementation is used.  Setting ``FASTDIFF_PURE_PYTHON=1`` forces the
fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FASTDIFF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

profile_dp45 = _impl.profile_dp45
implicit_euler_step = _impl.implicit_euler_step

__all__ = ["BACKEND", "profile_dp45", "implicit_euler_step"]
