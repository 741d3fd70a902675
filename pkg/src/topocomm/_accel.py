"""Numeric kernels with optional numba acceleration.

The hot inner loops of the package are breadth-first searches from every
vertex and per-cut crossing-mass scans; both are called tens of thousands
of times by the Monte Carlo and LP batteries.  Each kernel has a numba
``@njit`` implementation and a vectorized pure-numpy fallback.  Selection
is controlled by the ``TOPOCOMM_NUMBA`` environment variable:

    TOPOCOMM_NUMBA=0   force the numpy path
    TOPOCOMM_NUMBA=1   require numba (ImportError if missing)
    unset / auto       use numba when importable, else numpy

Both paths produce bit-identical integer results; ``benchmarks/``
contains a script comparing their throughput.
"""

import os

import numpy as np

_env = os.environ.get("TOPOCOMM_NUMBA", "auto").strip().lower()
if _env in ("0", "false", "off", "no"):
    NUMBA_ENABLED = False
elif _env in ("1", "true", "on", "yes"):
    from numba import njit  # noqa: F401  (hard requirement when forced)

    NUMBA_ENABLED = True
else:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# pure-numpy implementations

def bfs_all_pairs_np(indptr, indices, n):
    """All-pairs unit-weight distances; -1 marks unreachable pairs."""
    adj = np.zeros((n, n), dtype=bool)
    for u in range(n):
        adj[u, indices[indptr[u]:indptr[u + 1]]] = True
    dist = np.full((n, n), -1, dtype=np.int32)
    np.fill_diagonal(dist, 0)
    frontier = np.eye(n, dtype=bool)
    visited = frontier.copy()
    d = 0
    while frontier.any():
        d += 1
        nxt = (frontier @ adj) & ~visited
        dist[nxt] = d
        visited |= nxt
        frontier = nxt
    return dist


def crossing_mass_np(masks, eu, ev, x):
    """For each cut bitmask, the total x-mass on its crossing edges."""
    cross = (((masks[:, None] >> eu[None, :]) ^ (masks[:, None] >> ev[None, :])) & 1)
    return cross.astype(np.float64) @ np.asarray(x, dtype=np.float64)


def pair_separation_counts_np(masks, n):
    """counts[u, v] = number of cut bitmasks separating u from v."""
    bits = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
    both = bits.T @ bits
    col = bits.sum(axis=0)
    # #masks with exactly one of u, v inside = col_u + col_v - 2*both
    return col[:, None] + col[None, :] - 2 * both


# ---------------------------------------------------------------------------
# numba implementations

if NUMBA_ENABLED:

    @njit(cache=True)
    def _bfs_all_pairs_jit(indptr, indices, n):  # pragma: no cover - jitted
        dist = np.full((n, n), -1, dtype=np.int32)
        queue = np.empty(n, dtype=np.int32)
        for s in range(n):
            head = 0
            tail = 0
            queue[tail] = s
            tail += 1
            dist[s, s] = 0
            while head < tail:
                u = queue[head]
                head += 1
                du = dist[s, u]
                for idx in range(indptr[u], indptr[u + 1]):
                    v = indices[idx]
                    if dist[s, v] < 0:
                        dist[s, v] = du + 1
                        queue[tail] = v
                        tail += 1
        return dist

    @njit(cache=True)
    def _crossing_mass_jit(masks, eu, ev, x):  # pragma: no cover - jitted
        m = masks.shape[0]
        ne = eu.shape[0]
        out = np.zeros(m, dtype=np.float64)
        for i in range(m):
            mk = masks[i]
            acc = 0.0
            for j in range(ne):
                if ((mk >> eu[j]) & 1) != ((mk >> ev[j]) & 1):
                    acc += x[j]
            out[i] = acc
        return out

    @njit(cache=True)
    def _pair_separation_counts_jit(masks, n):  # pragma: no cover - jitted
        counts = np.zeros((n, n), dtype=np.int64)
        for i in range(masks.shape[0]):
            mk = masks[i]
            for u in range(n):
                bu = (mk >> u) & 1
                for v in range(u + 1, n):
                    if bu != ((mk >> v) & 1):
                        counts[u, v] += 1
                        counts[v, u] += 1
        return counts

    def bfs_all_pairs_jit(indptr, indices, n):
        return _bfs_all_pairs_jit(
            np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64), n
        )

    def crossing_mass_jit(masks, eu, ev, x):
        return _crossing_mass_jit(
            np.asarray(masks, dtype=np.int64),
            np.asarray(eu, dtype=np.int64),
            np.asarray(ev, dtype=np.int64),
            np.asarray(x, dtype=np.float64),
        )

    def pair_separation_counts_jit(masks, n):
        return _pair_separation_counts_jit(np.asarray(masks, dtype=np.int64), n)

    bfs_all_pairs = bfs_all_pairs_jit
    crossing_mass = crossing_mass_jit
    pair_separation_counts = pair_separation_counts_jit
else:
    bfs_all_pairs = bfs_all_pairs_np
    crossing_mass = crossing_mass_np
    pair_separation_counts = pair_separation_counts_np
