"""Kernel backend selection.

The compiled Cython extension is used when it is importable; otherwise the
pure-Python module is used.  Set ``BJJ_BACKEND=python`` to force the
fallback (benchmarks and cross-checks do this).
"""

import os

from . import _kernels_py

if os.environ.get("BJJ_BACKEND", "").lower() == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
    else:
        BACKEND = "cython"

__all__ = ["BACKEND", "kernels"]
