"""Select the compiled kernels when available, else the numpy fallback.

Set ``SEMIMARKOV_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and the backend-agreement tests).
"""

from __future__ import annotations

import os

from . import _purepy

if os.environ.get("SEMIMARKOV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _purepy
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _purepy

COMPILED = _impl is not _purepy
NAME = "cython" if COMPILED else "numpy"

simulate_counts = _impl.simulate_counts
jacobi_eigvalsh = _impl.jacobi_eigvalsh
