"""Backend switch for the hot kernels.

Numba is used when importable unless ``MACROFACET_DISABLE_NUMBA`` is set to a
truthy value, in which case every kernel runs its pure-numpy implementation.
The flag is read once, at import time.
"""

import os

_FLAG = os.environ.get("MACROFACET_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError("disabled by MACROFACET_DISABLE_NUMBA")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    _njit = None

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def njit(func):
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)
