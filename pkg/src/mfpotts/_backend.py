"""Kernel backend selection.

The compiled kernels are used when the extension imported cleanly; otherwise
the NumPy versions.  ``MFPOTTS_BACKEND=python`` forces the fallback and
``MFPOTTS_BACKEND=cython`` makes a missing extension an ImportError.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _ckernels
except ImportError:  # extension not built
    _ckernels = None

KERNEL_NAMES = ("energies", "jacobi_eigh", "subset_scan", "mf_sweep")


def available() -> list[str]:
    return ["cython", "python"] if _ckernels is not None else ["python"]


def get(name: str) -> ModuleType:
    """Kernel module by name (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("mfpotts._kernels is not built; reinstall with a C compiler and Cython")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def _select() -> tuple[str, ModuleType]:
    forced = os.environ.get("MFPOTTS_BACKEND", "auto").strip().lower()
    if forced in ("python", "cython"):
        return forced, get(forced)
    if _ckernels is not None:
        return "cython", _ckernels
    return "python", _pykernels


BACKEND, kernels = _select()
