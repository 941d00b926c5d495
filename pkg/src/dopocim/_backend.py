"""Kernel backend selection.

The compiled Cython kernels are preferred; the pure-numpy fallback is used
when the extension is missing or when ``DOPOCIM_BACKEND=python`` is set.
Both backends consume identical random streams and implement identical maps,
so the choice affects speed only.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("DOPOCIM_BACKEND", "").strip().lower()

if _FORCED not in ("", "python", "c", "compiled"):
    raise RuntimeError(f"DOPOCIM_BACKEND must be 'python' or 'c', got {_FORCED!r}")

_compiled = None
if _FORCED != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None
        if _FORCED in ("c", "compiled"):
            raise RuntimeError("DOPOCIM_BACKEND=c requested but the compiled kernels are not built")


def active_backend() -> str:
    """Name of the backend in use: "c" or "python"."""
    return "c" if _compiled is not None else "python"


def kernels(backend: str | None = None):
    """The kernel module for ``backend`` (default: the active one)."""
    if backend in (None, ""):
        return _compiled if _compiled is not None else _kernels_py
    if backend in ("c", "compiled"):
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if backend == "python":
        return _kernels_py
    raise ValueError(f"unknown backend {backend!r}")
