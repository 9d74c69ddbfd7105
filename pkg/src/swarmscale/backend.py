"""Kernel backend selection: compiled extension with NumPy fallback.

The compiled core is preferred when importable. Set SWARMSCALE_BACKEND
to "python" to force the fallback or "c" to require the extension
(import error propagates if it is missing).
"""

from __future__ import annotations

import os

__all__ = ["BACKEND", "COMPILED", "interaction_pass_1d", "sources_1d", "sources_2d"]

_requested = os.environ.get("SWARMSCALE_BACKEND", "").strip().lower()

if _requested in ("", "c"):
    try:
        from . import _kernels_c as _impl

        COMPILED = True
    except ImportError:
        if _requested == "c":
            raise
        from . import _kernels_py as _impl

        COMPILED = False
elif _requested in ("python", "py"):
    from . import _kernels_py as _impl

    COMPILED = False
else:
    raise RuntimeError(
        f"SWARMSCALE_BACKEND={_requested!r} not understood; use 'c' or 'python'"
    )

BACKEND = "c" if COMPILED else "python"

interaction_pass_1d = _impl.interaction_pass_1d
sources_1d = _impl.sources_1d
sources_2d = _impl.sources_2d
