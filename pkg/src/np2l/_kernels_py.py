"""Pure numpy/scipy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np
import scipy.sparse as sp


def csr_spmm(indptr, indices, data, dense, n_rows):
    mat = sp.csr_matrix((data, indices, indptr), shape=(n_rows, dense.shape[0]))
    return np.ascontiguousarray(mat @ dense)


def segment_sum(ids, values, n_segments):
    out = np.zeros((n_segments, values.shape[1]), dtype=np.float64)
    np.add.at(out, ids, values)
    return out


def pair_dot(z, src, dst):
    return np.einsum("ij,ij->i", z[src], z[dst])
