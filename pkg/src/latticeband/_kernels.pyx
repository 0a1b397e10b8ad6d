# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch assembly kernel (hot path of the dispersion sampler)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def assemble_batch(double[:, ::1] static,
                   long long[::1] a_idx,
                   long long[::1] b_idx,
                   double[::1] ks,
                   double[:, ::1] offsets,
                   double[:, ::1] mus):
    """Reduced stiffness for a batch of wavevectors, (M, n, n) complex128.

    Same contract as _kernels_py.assemble_batch.
    """
    cdef Py_ssize_t m_count = mus.shape[0]
    cdef Py_ssize_t d = mus.shape[1]
    cdef Py_ssize_t n = static.shape[0]
    cdef Py_ssize_t s_count = ks.shape[0]

    out_arr = np.empty((m_count, n, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr

    cdef Py_ssize_t m, s, i, j
    cdef double theta, kv
    cdef double complex p
    for m in range(m_count):
        for i in range(n):
            for j in range(n):
                out[m, i, j] = static[i, j]
        for s in range(s_count):
            theta = 0.0
            for j in range(d):
                theta += offsets[s, j] * mus[m, j]
            kv = ks[s]
            p = kv * (cos(theta) + 1j * sin(theta))
            out[m, a_idx[s], b_idx[s]] -= p
            out[m, b_idx[s], a_idx[s]] -= p.conjugate()
    return out_arr
