"""Time the compiled kernels against the numpy/scipy fallback.

    python benchmarks/bench_kernels.py [--n 20000] [--degree 10] [--dim 128] [--repeat 5]

Both backends are checked for agreement before timing.
"""
import argparse
import timeit

import numpy as np

from np2l import kernels
from np2l.graph import gcn_normalized


def _cases(n, degree, dim, rng):
    pairs = rng.integers(0, n, size=(n * degree // 2, 2))
    adj = gcn_normalized(n, pairs[pairs[:, 0] != pairs[:, 1]])
    h = rng.standard_normal((n, dim))
    ids = rng.integers(0, 64, n)
    src, dst = rng.integers(0, n, 4 * n), rng.integers(0, n, 4 * n)
    return {
        "csr_spmm": lambda b: kernels.csr_spmm(adj.indptr, adj.indices, adj.data, h, n, backend=b),
        "segment_sum": lambda b: kernels.segment_sum(ids, h, 64, backend=b),
        "pair_dot": lambda b: kernels.pair_dot(h, src, dst, backend=b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--degree", type=int, default=10)
    ap.add_argument("--dim", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.HAVE_EXTENSION:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    cases = _cases(args.n, args.degree, args.dim, np.random.default_rng(0))
    print(f"n={args.n} degree={args.degree} dim={args.dim}, best of {args.repeat}")
    print(f"{'kernel':<12} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    for name, fn in cases.items():
        if not np.allclose(fn("cython"), fn("python"), rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        t = {b: min(timeit.repeat(lambda b=b: fn(b), number=1, repeat=args.repeat)) for b in ("cython", "python")}
        print(f"{name:<12} {1e3 * t['cython']:>10.2f} {1e3 * t['python']:>10.2f} {t['python'] / t['cython']:>7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
