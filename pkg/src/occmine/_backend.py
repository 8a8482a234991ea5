"""Selects the join kernel implementation at import time.

The compiled ``_kernels`` extension is used when importable; setting the
environment variable ``OCCMINE_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels

_available = {"python": _pykernels}
try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None
else:
    _available["cython"] = _kernels

if _kernels is not None and not os.environ.get("OCCMINE_PURE_PYTHON"):
    kernels = _kernels
    BACKEND = "cython"
else:
    kernels = _pykernels
    BACKEND = "python"


def available_backends():
    """Mapping of backend name to kernel module for every importable backend."""
    return dict(_available)


def get_backend(name=None):
    if name is None:
        return kernels
    try:
        return _available[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available; have {sorted(_available)}") from None
