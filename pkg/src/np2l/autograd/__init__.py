from np2l.autograd.optim import Adam
from np2l.autograd.sparse import SparseMatrix
from np2l.autograd.tensor import (
    NonFiniteError,
    Tensor,
    add,
    as_tensor,
    bce_with_logits,
    concat,
    exp,
    gaussian_sample,
    kl_standard_normal,
    matmul,
    mean,
    mul,
    pair_dot,
    relu,
    row_normalize,
    row_slice,
    sigmoid,
    softmax_cross_entropy,
    spmm,
    squared_error,
    sub,
    transpose,
)
from np2l.autograd.tensor import sum as tsum

__all__ = [
    "Adam", "SparseMatrix", "NonFiniteError", "Tensor", "add", "as_tensor",
    "bce_with_logits", "concat", "exp", "gaussian_sample", "kl_standard_normal",
    "matmul", "mean", "mul", "pair_dot", "relu", "row_normalize", "row_slice",
    "sigmoid", "softmax_cross_entropy", "spmm", "squared_error", "sub", "transpose",
    "tsum",
]
