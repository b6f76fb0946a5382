import numpy as np
import pytest

from np2l import _kernels_py, kernels
from np2l.autograd import SparseMatrix

BACKENDS = ["python"] + (["cython"] if kernels.HAVE_EXTENSION else [])


def _random_csr(rng, n, m, density=0.2):
    return SparseMatrix.from_dense(rng.standard_normal((n, m)) * (rng.random((n, m)) < density))


@pytest.mark.parametrize("backend", BACKENDS)
def test_csr_spmm(backend, rng):
    s = _random_csr(rng, 30, 20)
    d = rng.standard_normal((20, 7))
    out = kernels.csr_spmm(s.indptr, s.indices, s.data, d, s.shape[0], backend=backend)
    assert np.allclose(out, s.to_dense() @ d, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_segment_sum(backend, rng):
    ids = rng.integers(0, 6, 40)
    vals = rng.standard_normal((40, 3))
    out = kernels.segment_sum(ids, vals, 8, backend=backend)
    ref = np.zeros((8, 3))
    for i, v in zip(ids, vals):
        ref[i] += v
    assert np.allclose(out, ref, atol=1e-12)
    assert np.all(out[6:] == 0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_pair_dot(backend, rng):
    z = rng.standard_normal((10, 4))
    src, dst = rng.integers(0, 10, 15), rng.integers(0, 10, 15)
    out = kernels.pair_dot(z, src, dst, backend=backend)
    assert np.allclose(out, [z[a] @ z[b] for a, b in zip(src, dst)], atol=1e-12)


@pytest.mark.skipif(not kernels.HAVE_EXTENSION, reason="compiled extension not built")
def test_backends_agree_on_empty_rows(rng):
    s = SparseMatrix.from_dense(np.array([[0.0, 0.0], [1.0, 2.0], [0.0, 0.0]]))
    d = rng.standard_normal((2, 3))
    a = kernels.csr_spmm(s.indptr, s.indices, s.data, d, 3, backend="cython")
    b = _kernels_py.csr_spmm(s.indptr, s.indices, s.data, d, 3)
    assert np.allclose(a, b)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
