"""Compare the numpy and numba backends on the probe-evaluation kernels.

Run directly: python3 benchmarks/bench_kernels.py
"""
from __future__ import annotations

import os
import time

import numpy as np


def bench(backend: str, depth: int, dim: int, n_probes: int) -> float:
    os.environ["HAARTYPE_NUMBA"] = "1" if backend == "numba" else "0"
    from haartype.kernels import TreeArrays, type_ratio
    from haartype.tree import build_dyadic

    tree = build_dyadic(depth)
    ta = TreeArrays.from_tree(tree)
    rng = np.random.default_rng(0)
    probes = [rng.normal(size=(ta.n_leaves, dim)) for _ in range(n_probes)]
    # warm-up (jit compilation lands here for the numba path)
    type_ratio(ta, probes[0], 2.0, 1.5)
    t0 = time.perf_counter()
    for v in probes:
        type_ratio(ta, v, 2.0, 1.5)
    return time.perf_counter() - t0


def main() -> int:
    from haartype.kernels import HAS_NUMBA

    cases = [(8, 1, 200), (10, 1, 200), (10, 4, 100), (12, 4, 50)]
    print(f"{'depth':>5} {'dim':>3} {'probes':>6} {'numpy  (s)':>11} {'numba  (s)':>11} {'speedup':>8}")
    for depth, dim, n in cases:
        t_np = bench("numpy", depth, dim, n)
        if HAS_NUMBA:
            t_nb = bench("numba", depth, dim, n)
            print(f"{depth:>5} {dim:>3} {n:>6} {t_np:>11.4f} {t_nb:>11.4f} {t_np / t_nb:>8.2f}x")
        else:
            print(f"{depth:>5} {dim:>3} {n:>6} {t_np:>11.4f} {'-':>11} {'-':>8}")
    os.environ.pop("HAARTYPE_NUMBA", None)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
