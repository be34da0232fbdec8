"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when importable; otherwise the
pure-Python ``_pykernels`` module. Set ``LENSCOPE_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _pykernels

if os.environ.get("LENSCOPE_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

UNIFORM = _pykernels.UNIFORM
GLASER = _pykernels.GLASER
POWERLAW = _pykernels.POWERLAW

__all__ = ["kernels", "BACKEND", "UNIFORM", "GLASER", "POWERLAW"]
