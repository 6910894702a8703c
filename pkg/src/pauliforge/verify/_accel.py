"""Backend selection for the dense kernels.

Set ``PAULIFORGE_NO_NUMBA=1`` to force the pure-numpy implementation.
"""

from __future__ import annotations

import os

USE_NUMBA = os.environ.get("PAULIFORGE_NO_NUMBA", "").strip().lower() in ("", "0", "false", "no")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
