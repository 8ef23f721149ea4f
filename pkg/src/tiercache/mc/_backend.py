"""Kernel backend chosen at import: compiled if available, numpy otherwise.

Set ``TIERCACHE_PURE_PYTHON=1`` to force the numpy kernels.
"""
from __future__ import annotations

import os

from . import _kernels_py

kernels = _kernels_py
name = "python"

if os.environ.get("TIERCACHE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        name = "compiled"


def use(backend: str) -> None:
    """Switch backend at runtime (``"compiled"`` or ``"python"``), mainly for tests and benchmarks."""
    global kernels, name
    if backend == "python":
        kernels, name = _kernels_py, "python"
    elif backend == "compiled":
        from . import _kernels as _compiled

        kernels, name = _compiled, "compiled"
    else:
        raise ValueError(f"unknown backend {backend!r}")
