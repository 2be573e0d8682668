"""Pick the roof optimizer kernel at import time.

The compiled extension is preferred; setting ``NONCLASSICAL_PURE_PYTHON=1``
forces the pure-Python fallback.
"""
from __future__ import annotations

import os

from . import _jacobi_py

PURE = _jacobi_py

try:
    from . import _jacobi as COMPILED  # type: ignore[attr-defined]
except ImportError:
    COMPILED = None

if COMPILED is not None and os.environ.get("NONCLASSICAL_PURE_PYTHON", "").strip() in ("", "0"):
    kernel = COMPILED
    BACKEND = "cython"
else:
    kernel = _jacobi_py
    BACKEND = "python"

jacobi_minimize = kernel.jacobi_minimize
ensemble_value = kernel.ensemble_value
