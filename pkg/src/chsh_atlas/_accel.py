"""Backend selection for the batched kernels.

``CHSH_ATLAS_BACKEND=numpy`` forces the pure-numpy code paths;
``CHSH_ATLAS_BACKEND=numba`` requires numba.  Unset means "numba if it
imports".  ``CHSH_ATLAS_THREADS`` caps numba's thread pool.
"""

from __future__ import annotations

import os

_requested = os.environ.get("CHSH_ATLAS_BACKEND", "").strip().lower()
if _requested not in ("", "numpy", "numba"):
    raise ImportError(f"CHSH_ATLAS_BACKEND must be 'numpy' or 'numba', got {_requested!r}")

try:
    if _requested == "numpy":
        raise ImportError
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; workqueue is always available
        os.environ["NUMBA_THREADING_LAYER"] = "workqueue"
    import numba

    HAVE_NUMBA = True
except ImportError:
    if _requested == "numba":
        raise
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"

if HAVE_NUMBA:
    _threads = os.environ.get("CHSH_ATLAS_THREADS")
    if _threads:
        numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))

    njit = numba.njit
    prange = numba.prange
else:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

    prange = range
