"""A small reverse-mode differentiation engine over 2-D float64 arrays.

Only the operations the encoders need are provided. Each op checks its
forward output for NaN/Inf and raises :class:`NonFiniteError` at the first
offending op, which makes diverging runs easy to localise.

Gradients accumulate into ``Tensor.grad`` of leaves with
``requires_grad=True``. Calling :meth:`Tensor.backward` twice without
zeroing adds the second gradient on top of the first.
"""
import numpy as np

from np2l import kernels


class NonFiniteError(FloatingPointError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._parents = ()
        self._backward = None
        self._op = "leaf"

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def is_leaf(self):
        return self._backward is None

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self._op}{tag}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self):
        if self.data.size != 1:
            raise ValueError(f"backward needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise RuntimeError("loss is detached: no parameter with requires_grad reaches it")
        order = _topological(self)
        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                if node.requires_grad:
                    node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            parent_grads = node._backward(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg


def _topological(root):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward, op):
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"non-finite values produced by {op}")
    out = Tensor(data)
    out._op = op
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(grad, shape):
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


# elementwise -----------------------------------------------------------------

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(a.data + b.data, (a, b), backward, "add")


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _make(a.data - b.data, (a, b), backward, "sub")


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _make(a.data * b.data, (a, b), backward, "mul")


def relu(a):
    mask = a.data > 0

    def backward(g):
        return (g * mask,)

    return _make(np.where(mask, a.data, 0.0), (a,), backward, "relu")


def _sigmoid(x):
    # split by sign so neither branch overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a):
    s = _sigmoid(a.data)

    def backward(g):
        return (g * s * (1.0 - s),)

    return _make(s, (a,), backward, "sigmoid")


def exp(a):
    e = np.exp(a.data)

    def backward(g):
        return (g * e,)

    return _make(e, (a,), backward, "exp")


# linear algebra --------------------------------------------------------------

def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch {a.shape} @ {b.shape}")

    def backward(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.T @ g if b.requires_grad else None
        return ga, gb

    return _make(a.data @ b.data, (a, b), backward, "matmul")


def spmm(s, d):
    """Constant linear operator times a dense tensor.

    ``s`` is a :class:`~np2l.autograd.sparse.SparseMatrix` or any object with
    ``shape``, ``matmul(dense)`` and ``rmatmul(dense)`` (the transpose
    product). The gradient flows to ``d`` only.
    """
    d = as_tensor(d)
    if d.ndim != 2 or s.shape[1] != d.shape[0]:
        raise ValueError(f"spmm shape mismatch {s.shape} @ {d.shape}")

    def backward(g):
        return (s.rmatmul(g),)

    return _make(s.matmul(d.data), (d,), backward, "spmm")


def transpose(a):
    def backward(g):
        return (g.T,)

    return _make(a.data.T.copy(), (a,), backward, "transpose")


def concat(tensors, axis=1):
    tensors = [as_tensor(t) for t in tensors]
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, sizes, axis=axis))

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward, "concat")


def row_slice(a, start, stop):
    def backward(g):
        full = np.zeros_like(a.data)
        full[start:stop] = g
        return (full,)

    return _make(a.data[start:stop].copy(), (a,), backward, "row_slice")


def row_normalize(a, scale=1.0):
    """Rescale each row to norm ``scale``; all-zero rows stay zero."""
    norms = np.sqrt(np.einsum("ij,ij->i", a.data, a.data))[:, None]
    nz = norms > 0
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=nz)
    out = scale * a.data * inv

    def backward(g):
        proj = np.einsum("ij,ij->i", a.data, g)[:, None]
        return (scale * (g * inv - a.data * proj * inv ** 3),)

    return _make(out, (a,), backward, "row_normalize")


def pair_dot(z, src, dst):
    """Inner products ``z[src[e]] . z[dst[e]]`` as an (E,) tensor."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    n = z.shape[0]

    def backward(g):
        ids = np.concatenate([src, dst])
        rows = np.concatenate([g[:, None] * z.data[dst], g[:, None] * z.data[src]])
        return (kernels.segment_sum(ids, rows, n),)

    return _make(kernels.pair_dot(z.data, src, dst), (z,), backward, "pair_dot")


# reductions ------------------------------------------------------------------

def sum(a):  # noqa: A001 - mirrors numpy naming
    def backward(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return _make(np.asarray(a.data.sum()), (a,), backward, "sum")


def mean(a):
    n = a.data.size

    def backward(g):
        return (np.full(a.shape, float(g) / n),)

    return _make(np.asarray(a.data.mean()), (a,), backward, "mean")


# losses ----------------------------------------------------------------------

def bce_with_logits(logits, targets):
    """Mean binary cross entropy of ``sigmoid(logits)`` against 0/1 targets."""
    x = logits.data
    t = np.asarray(targets, dtype=np.float64)
    if t.shape != x.shape:
        raise ValueError("targets must match logits")
    per = np.maximum(x, 0.0) - x * t + np.log1p(np.exp(-np.abs(x)))
    n = x.size

    def backward(g):
        return (float(g) * (_sigmoid(x) - t) / n,)

    return _make(np.asarray(per.mean()), (logits,), backward, "bce_with_logits")


def squared_error(logits, targets):
    """Mean of ``(targets - sigmoid(logits))**2``."""
    s = _sigmoid(logits.data)
    t = np.asarray(targets, dtype=np.float64)
    n = s.size

    def backward(g):
        return (float(g) * 2.0 * (s - t) * s * (1.0 - s) / n,)

    return _make(np.asarray(((s - t) ** 2).mean()), (logits,), backward, "squared_error")


def softmax_cross_entropy(logits, labels, rows=None):
    """Mean cross entropy over ``rows`` (all rows when None)."""
    x = logits.data
    labels = np.asarray(labels, dtype=np.int64)
    rows = np.arange(x.shape[0]) if rows is None else np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("softmax_cross_entropy over an empty row set")
    xs = x[rows]
    shifted = xs - xs.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(rows.size), labels[rows]]
    loss = (logz - picked).mean()

    def backward(g):
        p = np.exp(shifted - logz[:, None])
        p[np.arange(rows.size), labels[rows]] -= 1.0
        full = np.zeros_like(x)
        np.add.at(full, rows, p * (float(g) / rows.size))
        return (full,)

    return _make(np.asarray(loss), (logits,), backward, "softmax_cross_entropy")


def gaussian_sample(mu, logvar, eps):
    """Reparameterised draw ``mu + exp(logvar / 2) * eps`` with fixed noise."""
    eps = np.asarray(eps, dtype=np.float64)
    std = np.exp(0.5 * logvar.data)

    def backward(g):
        return g, g * eps * 0.5 * std

    return _make(mu.data + std * eps, (mu, logvar), backward, "gaussian_sample")


def kl_standard_normal(mu, logvar, scale=1.0):
    """``-scale/2 * sum(1 + logvar - mu^2 - exp(logvar))``, i.e. scale * KL(q || N(0, I))."""
    var = np.exp(logvar.data)
    val = -0.5 * scale * np.sum(1.0 + logvar.data - mu.data ** 2 - var)

    def backward(g):
        g = float(g)
        return g * scale * mu.data, g * 0.5 * scale * (var - 1.0)

    return _make(np.asarray(val), (mu, logvar), backward, "kl_standard_normal")
