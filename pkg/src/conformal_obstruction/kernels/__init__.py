"""Radial shooting kernels: compiled when available, pure Python otherwise.

Set ``CONFORMAL_OBSTRUCTION_PURE=1`` to force the Python implementation.
"""

import importlib
import os

from . import _shoot_py as python_backend


def load_backend(name: str):
    """Return the kernel module ``"cython"`` or ``"python"``."""
    if name == "python":
        return python_backend
    if name == "cython":
        return importlib.import_module("._shoot", __name__)
    raise ValueError(f"unknown backend {name!r}")


BACKEND = "python"
_kernel = python_backend
if os.environ.get("CONFORMAL_OBSTRUCTION_PURE", "") not in ("1", "true", "yes"):
    try:
        _kernel = load_backend("cython")
        BACKEND = "cython"
    except ImportError:
        pass

dp45_step = _kernel.dp45_step
integrate = _kernel.integrate
RMAX_REACHED = python_backend.RMAX_REACHED
CROSSED = python_backend.CROSSED
UNDERFLOW = python_backend.UNDERFLOW
BLOWUP = python_backend.BLOWUP
MAX_STEPS = python_backend.MAX_STEPS
