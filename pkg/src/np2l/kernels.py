"""Backend selection for the hot message-passing kernels.

The compiled Cython module is used when it imports cleanly; otherwise the
numpy/scipy fallback is used. Set ``NP2L_KERNELS=python`` to force the
fallback (useful for benchmarking and for checking the two agree).
"""
import os

import numpy as np

from np2l import _kernels_py

_forced = os.environ.get("NP2L_KERNELS", "").lower()

if _forced == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from np2l import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _kernels_py
        BACKEND = "python"


try:
    from np2l import _kernels as _compiled  # noqa: F401
    HAVE_EXTENSION = True
except ImportError:
    HAVE_EXTENSION = False


def _idx(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def csr_spmm(indptr, indices, data, dense, n_rows, backend=None):
    impl = _pick(backend)
    dense = _f64(dense)
    if dense.ndim != 2:
        raise ValueError("dense operand must be 2-D")
    return impl.csr_spmm(_idx(indptr), _idx(indices), _f64(data), dense, int(n_rows))


def segment_sum(ids, values, n_segments, backend=None):
    impl = _pick(backend)
    return impl.segment_sum(_idx(ids), _f64(values), int(n_segments))


def pair_dot(z, src, dst, backend=None):
    impl = _pick(backend)
    return impl.pair_dot(_f64(z), _idx(src), _idx(dst))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        from np2l import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {backend!r}")
