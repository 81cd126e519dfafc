"""Backend selection for the numeric kernels.

Set ``QWDC_BACKEND=numpy`` to force the pure-numpy path. The default is
``numba`` when numba imports cleanly, otherwise ``numpy``.
"""
import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is optional at runtime
    _numba = None

HAS_NUMBA = _numba is not None


def _noop(*args0, **kwargs0):
    if len(args0) == 1 and callable(args0[0]) and not kwargs0:
        return args0[0]

    def wrapper(func):
        return func

    return wrapper


if HAS_NUMBA:
    njit = _numba.njit
else:  # pragma: no cover
    njit = _noop


def _initial_backend():
    requested = os.environ.get("QWDC_BACKEND", "").strip().lower()
    if requested in ("", "numba"):
        return "numba" if HAS_NUMBA else "numpy"
    if requested == "numpy":
        return "numpy"
    raise ValueError(f"QWDC_BACKEND must be 'numba' or 'numpy', got {requested!r}")


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Switch the kernel backend at runtime (used by tests and benchmarks)."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _backend = name
