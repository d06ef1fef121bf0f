"""Backend selection for the hot loops.

Every kernel in :mod:`roughfrac.kernels` has a numba implementation and a
vectorised numpy fallback.  The numba path is used when numba imports and the
environment variable ``ROUGHFRAC_NUMBA`` is not set to ``0``/``off``.
"""
import contextlib
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

_OFF = {"0", "off", "false", "no"}

_state = {
    "backend": (
        "numba"
        if numba is not None
        and os.environ.get("ROUGHFRAC_NUMBA", "1").strip().lower() not in _OFF
        else "numpy"
    )
}


def jit(fn):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if numba is None:  # pragma: no cover
        return fn
    return numba.njit(cache=True)(fn)


def backend():
    return _state["backend"]


def set_backend(name):
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and numba is None:  # pragma: no cover
        raise RuntimeError("numba is not installed")
    _state["backend"] = name


@contextlib.contextmanager
def using_backend(name):
    old = backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)
