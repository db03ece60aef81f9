"""Backend selection for the hot numerical kernels.

The compiled Cython kernel is preferred when it imported cleanly; the
pure-numpy fallback has an identical contract.  Set ``GRAPHEMB_PURE=1``
before import to force the fallback (used by the backend-parity tests and
the benchmark).
"""

import os

from graphemb.kernels import pure as _pure

_force_pure = os.environ.get("GRAPHEMB_PURE", "").strip() not in ("", "0")

if not _force_pure:
    try:
        from graphemb.kernels import _native
    except ImportError:
        _native = None
else:
    _native = None

if _native is not None:
    BACKEND = "native"
    jacobi_eigh = _native.jacobi_eigh
else:
    BACKEND = "pure"
    jacobi_eigh = _pure.jacobi_eigh

DEFAULT_TOL = _pure.DEFAULT_TOL
MAX_SWEEPS = _pure.MAX_SWEEPS

__all__ = ["BACKEND", "jacobi_eigh", "DEFAULT_TOL", "MAX_SWEEPS"]
