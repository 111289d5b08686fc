"""Kernel backend selection.

Hot trajectory loops are compiled with numba when available.  Setting
WEDGE_ECHO_BACKEND=numpy forces the plain-Python/numpy path (same source
functions, undecorated); WEDGE_ECHO_BACKEND=numba requires numba and
fails loudly if it is missing.  The selected backend is importable as
BACKEND_NAME so runs can record it.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised via env flag in CI boxes
    numba = None

_choice = os.environ.get("WEDGE_ECHO_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"WEDGE_ECHO_BACKEND must be auto|numba|numpy, got {_choice!r}"
    )
if _choice == "numba" and numba is None:
    raise RuntimeError("WEDGE_ECHO_BACKEND=numba but numba is not importable")

USE_NUMBA = numba is not None and _choice != "numpy"
BACKEND_NAME = "numba" if USE_NUMBA else "numpy"


def maybe_jit(fn):
    """Compile `fn` with numba on the accelerated path, else return it as-is.

    fastmath stays off: bounce sequences must be bit-reproducible for a
    given backend regardless of thread count.
    """
    if USE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn
