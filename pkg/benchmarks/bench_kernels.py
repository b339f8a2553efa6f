"""Compare the compiled and pure-Python kernels.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``
"""

import argparse
import math
import timeit

import numpy as np

from lgme import fock
from lgme._kernels import _pykernels

try:
    from lgme._kernels import _ckernels
except ImportError:
    _ckernels = None


def _schmidt_operator(lam):
    # a large post-measurement 2:2 reshaping, the shape the GGM solver sees
    from lgme.entanglement import Bipartition, schmidt_matrix

    state = fock.photon_fmsv(math.atanh(lam), "add", (2, 0, 2, 0), epsilon=1e-12)
    mat = schmidt_matrix(state, Bipartition.of([1, 2], 4))
    op = mat if mat.shape[1] <= mat.shape[0] else mat.T.tocsr()
    op.sort_indices()
    return op.indptr.astype(np.int64), op.indices.astype(np.int64), op.data, op.shape[1]


def bench(label, funcs, repeat):
    times = {}
    for name, func in funcs.items():
        times[name] = min(timeit.repeat(func, number=1, repeat=repeat))
    line = f"{label:<42}" + "".join(f"{name:>8} {t * 1e3:9.2f} ms" for name, t in times.items())
    if len(times) == 2:
        line += f"   speedup x{times['python'] / times['cython']:.1f}"
    print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    impls = {"python": _pykernels}
    if _ckernels is not None:
        impls["cython"] = _ckernels
    else:
        print("compiled kernels not built; timing the pure-Python fallback only")

    for lam, n_max in ((0.5, 40), (0.9, 109), (0.9, 175)):
        bench(f"fmsv_support lam={lam} n_max={n_max}",
              {k: (lambda m=m: m.fmsv_support(lam, n_max)) for k, m in impls.items()}, args.repeat)

    for lam in (0.7, 0.9):
        indptr, indices, data, n_cols = _schmidt_operator(lam)
        bench(f"top_singular_sq lam={lam} ({len(indptr) - 1}x{n_cols})",
              {k: (lambda m=m: m.top_singular_sq(indptr, indices, data, n_cols, 1e-12, 10_000))
               for k, m in impls.items()}, args.repeat)


if __name__ == "__main__":
    main()
