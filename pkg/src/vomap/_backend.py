"""Select the recurrence kernel at import time.

The compiled extension is preferred. Setting ``VOMAP_PURE_PYTHON=1`` forces
the numpy fallback, which is also used when the extension was not built.
"""

from __future__ import annotations

import os

from vomap import _fallback

if os.environ.get("VOMAP_PURE_PYTHON", "") not in ("", "0"):
    run_recurrence = _fallback.run_recurrence
    BACKEND = "python"
else:
    try:
        from vomap._core import run_recurrence
        BACKEND = "cython"
    except ImportError:
        run_recurrence = _fallback.run_recurrence
        BACKEND = "python"

fallback_run_recurrence = _fallback.run_recurrence

__all__ = ["BACKEND", "fallback_run_recurrence", "run_recurrence"]
