"""Backend selection, done once at import.

Prefers the compiled extension; falls back to the numpy lane. Override with
TEGNAS_BACKEND=python (force fallback) or TEGNAS_BACKEND=compiled (require
the extension, raise if missing).
"""
import os

from . import _backend_py

_requested = os.environ.get("TEGNAS_BACKEND", "").strip().lower()

if _requested in ("python", "py"):
    kernels = _backend_py
    name = "python"
elif _requested in ("compiled", "cython", "ext"):
    from . import _kernels as kernels  # noqa: F401
    name = "compiled"
elif _requested == "":
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
        name = "compiled"
    except ImportError:
        kernels = _backend_py
        name = "python"
else:
    raise RuntimeError(f"unrecognized TEGNAS_BACKEND value: {_requested!r}")
