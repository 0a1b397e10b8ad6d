"""Pure-numpy fallback for the batch assembly kernel.

Same contract as the compiled module in _kernels.pyx; used when the
extension was not built. The scatter of the phased coupling terms is done
as one complex matmul against a precomputed stamp matrix, so duplicate
(a, b) pairs across offsets accumulate correctly.
"""

from __future__ import annotations

import numpy as np


def assemble_batch(static, a_idx, b_idx, ks, offsets, mus):
    """Reduced stiffness for a batch of wavevectors.

    Parameters mirror assembly.SpringArrays plus mus (M, d); returns
    (M, n, n) complex128.
    """
    m = mus.shape[0]
    n = static.shape[0]
    out = np.empty((m, n, n), dtype=np.complex128)
    out[:] = static
    s = ks.shape[0]
    if s == 0:
        return out
    phases = np.exp(1j * (mus @ offsets.T))          # (M, S)
    stamp_ab = np.zeros((s, n * n))
    stamp_ba = np.zeros((s, n * n))
    rows = np.arange(s)
    stamp_ab[rows, a_idx * n + b_idx] = -ks
    stamp_ba[rows, b_idx * n + a_idx] = -ks
    flat = out.reshape(m, n * n)
    flat += phases @ stamp_ab
    flat += np.conj(phases) @ stamp_ba
    return out
