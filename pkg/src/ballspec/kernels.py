"""Hot loops, compiled when the extension is available.

Set ``BALLSPEC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("BALLSPEC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    IMPLEMENTATION = "python"
else:
    try:
        from . import _kernels as _impl

        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = _kernels_py
        IMPLEMENTATION = "python"

jacobi_table = _impl.jacobi_table
banded_matvec = _impl.banded_matvec

__all__ = ["IMPLEMENTATION", "jacobi_table", "banded_matvec"]
