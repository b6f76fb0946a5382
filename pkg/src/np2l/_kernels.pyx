# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled message-passing kernels.

Every routine accumulates in a fixed index order, so results do not depend
on scheduling and match the reference order used by ``_kernels_py``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t


def csr_spmm(const idx_t[::1] indptr, const idx_t[::1] indices,
             const double[::1] data, const double[:, ::1] dense,
             Py_ssize_t n_rows):
    """Return ``S @ dense`` for S in CSR form with ``n_rows`` rows."""
    cdef Py_ssize_t n_cols = dense.shape[1]
    out_arr = np.zeros((n_rows, n_cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, p, c
    cdef idx_t j
    cdef double v
    with nogil:
        for i in range(n_rows):
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                v = data[p]
                for c in range(n_cols):
                    out[i, c] += v * dense[j, c]
    return out_arr


def segment_sum(const idx_t[::1] ids, const double[:, ::1] values,
                Py_ssize_t n_segments):
    """Sum rows of ``values`` that share an id; row order is preserved."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t n_cols = values.shape[1]
    out_arr = np.zeros((n_segments, n_cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, c
    cdef idx_t s
    with nogil:
        for i in range(n):
            s = ids[i]
            for c in range(n_cols):
                out[s, c] += values[i, c]
    return out_arr


def pair_dot(const double[:, ::1] z, const idx_t[::1] src,
             const idx_t[::1] dst):
    """Row-wise inner products ``z[src[e]] . z[dst[e]]``."""
    cdef Py_ssize_t n_pairs = src.shape[0]
    cdef Py_ssize_t d = z.shape[1]
    out_arr = np.zeros(n_pairs, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t e, c
    cdef idx_t a, b
    cdef double acc
    with nogil:
        for e in range(n_pairs):
            a = src[e]
            b = dst[e]
            acc = 0.0
            for c in range(d):
                acc = acc + z[a, c] * z[b, c]
            out[e] = acc
    return out_arr
