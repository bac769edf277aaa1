"""Backend selection for the hot numeric kernels.

A compiled Cython core is preferred when importable; a pure-numpy fallback
is always available.  Selection happens at import time and can be forced
with FEDSADDLE_BACKEND=pure|compiled, or switched at runtime (tests and
benchmarks do this) with `use_backend`.
"""
import contextlib
import os

from . import pure

_backends = {"pure": pure}
try:  # compiled core is optional
    from . import _core

    _backends["compiled"] = _core
except ImportError:
    _core = None

_env = os.environ.get("FEDSADDLE_BACKEND", "auto")
if _env not in ("auto", "pure", "compiled"):
    raise ImportError(f"FEDSADDLE_BACKEND must be auto|pure|compiled, got {_env!r}")
if _env == "compiled" and "compiled" not in _backends:
    raise ImportError("FEDSADDLE_BACKEND=compiled but the compiled core is not built")

_active = _backends.get("compiled", pure) if _env in ("auto", "compiled") else pure


def active_backend():
    return _active.name


def available_backends():
    return sorted(_backends)


def use_backend(name):
    """Switch the active backend; returns the previous backend name."""
    global _active
    if name not in _backends:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    prev = _active.name
    _active = _backends[name]
    return prev


@contextlib.contextmanager
def forced_backend(name):
    prev = use_backend(name)
    try:
        yield
    finally:
        use_backend(prev)


def quad_batch_grads(*args):
    return _active.quad_batch_grads(*args)


def quad_vr_update(*args):
    return _active.quad_vr_update(*args)


def quad_vr_round(*args):
    return _active.quad_vr_round(*args)
