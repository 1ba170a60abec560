"""Inner-loop kernels with a compiled backend and a numpy fallback.

The Cython extension is used when it was built and ``CURVESCOPE_PURE_PYTHON``
is not set to ``1``; otherwise the numpy implementations are used.
"""
from __future__ import annotations

import os

from . import _pure

def get_backend(name: str):
    """Return the kernel module named ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pure
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def _select():
    if os.environ.get("CURVESCOPE_PURE_PYTHON", "") == "1":
        return "python", _pure
    try:
        from . import _ckernels
    except ImportError:
        return "python", _pure
    return "cython", _ckernels


BACKEND, _impl = _select()

nonmax_suppress = _impl.nonmax_suppress
hysteresis = _impl.hysteresis
zhang_suen = _impl.zhang_suen
dog_extrema = _impl.dog_extrema
sift_descriptor = _impl.sift_descriptor

__all__ = [
    "BACKEND",
    "get_backend",
    "nonmax_suppress",
    "hysteresis",
    "zhang_suen",
    "dog_extrema",
    "sift_descriptor",
]
