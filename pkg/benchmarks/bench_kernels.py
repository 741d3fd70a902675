#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py
The numba path also reflects TOPOCOMM_NUMBA (set to 0 to confirm the
fallback is what the package would use)."""

import time

import numpy as np

from topocomm import _accel
from topocomm.cuts import enumerate_cut_masks
from topocomm.graph import grid_graph


def _time(fn, *args, repeat=5):
    fn(*args)  # warm-up (JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print(f"numba enabled: {_accel.NUMBA_ENABLED}")
    rows = []

    g = grid_graph(4, 4)
    indptr, indices = g._csr
    n = g.vertex_count
    masks = enumerate_cut_masks(n)
    eu, ev = g.edge_arrays
    x = np.random.default_rng(0).random(len(g.edges))

    impls = [("numpy", _accel.bfs_all_pairs_np)]
    if _accel.NUMBA_ENABLED:
        impls.append(("numba", _accel.bfs_all_pairs_jit))
    base = None
    for name, fn in impls:
        t = _time(lambda: [fn(indptr, indices, n) for _ in range(200)])
        base = base or t
        rows.append(("bfs_all_pairs x200 (4x4 grid)", name, t, base / t))

    impls = [("numpy", _accel.crossing_mass_np)]
    if _accel.NUMBA_ENABLED:
        impls.append(("numba", _accel.crossing_mass_jit))
    base = None
    for name, fn in impls:
        t = _time(lambda: [fn(masks, eu, ev, x) for _ in range(50)])
        base = base or t
        rows.append(("crossing_mass x50 (32767 cuts)", name, t, base / t))

    impls = [("numpy", _accel.pair_separation_counts_np)]
    if _accel.NUMBA_ENABLED:
        impls.append(("numba", _accel.pair_separation_counts_jit))
    base = None
    for name, fn in impls:
        t = _time(lambda: [fn(masks, n) for _ in range(10)])
        base = base or t
        rows.append(("pair_separation x10 (32767 cuts)", name, t, base / t))

    width = max(len(r[0]) for r in rows) + 2
    print(f"{'kernel':<{width}}{'impl':<8}{'best (s)':<12}{'speedup vs numpy'}")
    for kernel, name, t, speedup in rows:
        print(f"{kernel:<{width}}{name:<8}{t:<12.4f}{speedup:.2f}x")

    # cross-check: both paths agree bit-for-bit
    if _accel.NUMBA_ENABLED:
        assert (
            _accel.bfs_all_pairs_np(indptr, indices, n)
            == _accel.bfs_all_pairs_jit(indptr, indices, n)
        ).all()
        assert np.allclose(
            _accel.crossing_mass_np(masks, eu, ev, x),
            _accel.crossing_mass_jit(masks, eu, ev, x),
        )
        assert (
            _accel.pair_separation_counts_np(masks, n)
            == _accel.pair_separation_counts_jit(masks, n)
        ).all()
        print("cross-check: numba and numpy outputs identical")


if __name__ == "__main__":
    main()
