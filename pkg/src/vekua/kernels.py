"""Kernel backend selection.

The compiled extension is used when it imports; set ``VEKUA_PURE=1`` to
force the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.getenv("VEKUA_PURE") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"cython"``, ``"python"``) or the default."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def scan_backward(c, A, backend=None):
    return get_backend(backend).scan_backward(np.ascontiguousarray(c, dtype=complex),
                                              np.ascontiguousarray(A, dtype=complex))


def scan_forward(c, A, backend=None):
    return get_backend(backend).scan_forward(np.ascontiguousarray(c, dtype=complex),
                                             np.ascontiguousarray(A, dtype=complex))


def rk4_propagate(q_half, s_half, a, b, delta, alpha, F_half, h, backend=None):
    return get_backend(backend).rk4_propagate(
        np.ascontiguousarray(q_half, dtype=float),
        np.ascontiguousarray(s_half, dtype=float),
        np.ascontiguousarray(a, dtype=float),
        np.ascontiguousarray(b, dtype=float),
        float(delta),
        complex(alpha),
        np.ascontiguousarray(F_half, dtype=complex),
        float(h),
    )
