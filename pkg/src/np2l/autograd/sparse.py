"""CSR sparse matrices used as constant operands in message passing."""
import numpy as np
import scipy.sparse as sp

from np2l import kernels


class SparseMatrix:
    """Immutable CSR matrix with sorted column indices and no stored zeros.

    Only products with dense right-hand sides are supported; the matrix is
    always a constant (gradients flow to the dense operand only).
    """

    __slots__ = ("indptr", "indices", "data", "shape", "_t")

    def __init__(self, indptr, indices, data, shape):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.shape = (int(shape[0]), int(shape[1]))
        self._t = None
        if self.indptr.shape[0] != self.shape[0] + 1:
            raise ValueError("indptr length must be rows + 1")
        if self.indices.shape != self.data.shape:
            raise ValueError("indices and data lengths differ")

    @classmethod
    def from_scipy(cls, mat):
        mat = sp.csr_matrix(mat, dtype=np.float64, copy=True)
        mat.sum_duplicates()
        mat.eliminate_zeros()
        mat.sort_indices()
        return cls(mat.indptr, mat.indices, mat.data, mat.shape)

    @classmethod
    def from_coo(cls, rows, cols, vals, shape):
        """Build from triplets; duplicate coordinates are summed."""
        mat = sp.coo_matrix((np.asarray(vals, dtype=np.float64),
                             (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
                            shape=shape)
        return cls.from_scipy(mat.tocsr())

    @classmethod
    def from_dense(cls, dense):
        return cls.from_scipy(sp.csr_matrix(np.asarray(dense, dtype=np.float64)))

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n + 1), np.arange(n), np.ones(n), (n, n))

    @property
    def nnz(self):
        return int(self.data.shape[0])

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def to_dense(self):
        return self.to_scipy().toarray()

    def row_sums(self):
        return np.asarray(self.to_scipy().sum(axis=1)).ravel()

    def transpose(self):
        if self._t is None:
            self._t = SparseMatrix.from_scipy(self.to_scipy().T.tocsr())
            self._t._t = self
        return self._t

    T = property(transpose)

    def matmul(self, dense):
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != self.shape[1]:
            raise ValueError(f"shape mismatch: {self.shape} @ {dense.shape}")
        return kernels.csr_spmm(self.indptr, self.indices, self.data, dense, self.shape[0])

    def rmatmul(self, dense):
        """Return ``self.T @ dense``."""
        return self.transpose().matmul(dense)

    def scale_rows(self, w):
        w = np.asarray(w, dtype=np.float64)
        counts = np.diff(self.indptr)
        return SparseMatrix.from_scipy(
            sp.csr_matrix((self.data * np.repeat(w, counts), self.indices, self.indptr),
                          shape=self.shape))

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"
