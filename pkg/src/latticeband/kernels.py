"""Selects the batch assembly kernel: compiled extension or numpy fallback.

The compiled module is optional; when it failed to build (no Cython / no C
compiler at install time) everything runs through _kernels_py with identical
results. ``backend="compiled"``/``"python"`` forces a specific one, which the
benchmark and the cross-check tests use.
"""

from __future__ import annotations

import numpy as np

from . import _kernels_py
from .errors import LatticeBandError

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

HAVE_COMPILED = _compiled is not None
DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"


def backend_module(backend: str | None):
    if backend is None:
        backend = DEFAULT_BACKEND
    if backend == "python":
        return _kernels_py
    if backend == "compiled":
        if _compiled is None:
            raise LatticeBandError("compiled kernel requested but not built")
        return _compiled
    raise LatticeBandError(f"unknown kernel backend {backend!r}")


def assemble_batch(static, a_idx, b_idx, ks, offsets, mus, backend: str | None = None):
    mod = backend_module(backend)
    if mod is _kernels_py:
        return mod.assemble_batch(static, a_idx, b_idx, ks, offsets, mus)
    return mod.assemble_batch(
        np.ascontiguousarray(static),
        np.ascontiguousarray(a_idx),
        np.ascontiguousarray(b_idx),
        np.ascontiguousarray(ks),
        np.ascontiguousarray(offsets),
        np.ascontiguousarray(mus),
    )
