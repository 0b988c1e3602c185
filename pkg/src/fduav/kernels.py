"""Backend selection for the trajectory kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over. :func:`use_backend` switches explicitly, which
the benchmark and the cross-backend tests rely on.
"""

from __future__ import annotations

from types import ModuleType

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _kernels as _kernels_c
except ImportError:  # pragma: no cover
    _kernels_c = None

__all__ = ["backend", "available_backends", "use_backend", "speed_slack", "barrier_solve"]

_active: ModuleType = _kernels_c if _kernels_c is not None else _kernels_py


def available_backends() -> list:
    names = ["python"]
    if _kernels_c is not None:
        names.insert(0, "cython")
    return names


def backend() -> str:
    return _active.BACKEND


def use_backend(name: str) -> str:
    """Select ``"cython"`` or ``"python"``; returns the previous backend name."""
    global _active
    prev = _active.BACKEND
    if name == "python":
        _active = _kernels_py
    elif name == "cython":
        if _kernels_c is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        _active = _kernels_c
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def speed_slack(delta, s_k, psi, c, s0=None):
    return _active.speed_slack(delta, s_k, psi, c, s0)


def barrier_solve(*args, **kwargs):
    return _active.barrier_solve(*args, **kwargs)
