"""Numerical kernels with a compiled fast path.

The Cython extension ``_kernels`` is used when it has been built; otherwise,
or when ``EETSIM_PURE_PYTHON`` is set to a non-empty value, the numpy
implementations in ``_fallback`` are used. ``BACKEND`` names the active one.
"""

import os

from . import _fallback

try:
    if os.environ.get("EETSIM_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _fallback
    BACKEND = "python"

jacobi_eigh = _impl.jacobi_eigh
bessel_miller = _impl.bessel_miller
rk4_propagate = _impl.rk4_propagate
verlet_propagate = _impl.verlet_propagate


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    backends = {"python": _fallback}
    try:
        from . import _kernels

        backends["cython"] = _kernels
    except ImportError:
        pass
    return backends
