"""Backend selection for the classical-map kernels.

The compiled Cython module is used when it imports; otherwise the numpy
implementation. Set ``KICKTOPS_BACKEND=python`` to force the fallback.
``KICKTOPS_NUM_THREADS`` sets the OpenMP thread count of the compiled
kernels (default: all cores); output does not depend on it.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

THREADS_ENV = "KICKTOPS_NUM_THREADS"


def _default_backend():
    forced = os.environ.get("KICKTOPS_BACKEND", "").strip().lower()
    if forced:
        if forced not in BACKENDS:
            raise ImportError(f"KICKTOPS_BACKEND={forced!r} is not available (have {sorted(BACKENDS)})")
        return forced
    return "cython" if "cython" in BACKENDS else "python"


BACKEND = _default_backend()


def num_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def get(backend: str | None = None):
    """Kernel module for ``backend`` (default: the selected one)."""
    return BACKENDS[backend or BACKEND]
