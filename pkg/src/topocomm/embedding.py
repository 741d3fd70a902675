"""Spanning subtrees, stretch measurement, and LP solution transfer.

Distortion over a distribution of subtrees is replaced throughout by
per-sample measured stretch: every downstream inequality is checked with
the measured value in place of the asymptotic one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cuts import BValueSpec, enumerate_cut_masks
from .errors import NotSpanning
from .graph import Graph
from .lp import FLOAT_TOL, build_lower_lp, solve

STRATEGIES = ("random-mst", "shortest-path-tree", "low-stretch-heuristic")


def _spanning_tree_check(g: Graph, t: Graph):
    if t.vertex_count != g.vertex_count:
        raise NotSpanning("tree has a different vertex set")
    if not set(t.edges) <= set(g.edges):
        raise NotSpanning("tree uses edges outside the graph")
    if not t.is_tree():
        raise NotSpanning("subgraph is not a spanning tree")


def _mst_under_weights(g: Graph, weights):
    order = sorted(range(len(g.edges)), key=lambda i: (weights[i], g.edges[i]))
    parent = list(range(g.vertex_count))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    picked = []
    for i in order:
        u, v = g.edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            picked.append(g.edges[i])
            if len(picked) == g.vertex_count - 1:
                break
    return Graph(g.vertex_count, tuple(picked))


def _bfs_tree(g: Graph, root):
    parent = {root: root}
    frontier = [root]
    edges = []
    while frontier:
        nxt = []
        for u in sorted(frontier):
            for v in g.adjacency[u]:
                if v not in parent:
                    parent[v] = u
                    edges.append((u, v) if u < v else (v, u))
                    nxt.append(v)
        frontier = nxt
    return Graph(g.vertex_count, tuple(edges))


def sample_subtree(g: Graph, strategy="random-mst", seed=0) -> Graph:
    """Deterministic-in-seed spanning subtree of g."""
    g.distances  # connectivity check
    if strategy == "random-mst":
        rng = np.random.default_rng(seed)
        weights = 1.0 - rng.random(len(g.edges))  # uniform (0, 1]
        return _mst_under_weights(g, weights)
    if strategy == "shortest-path-tree":
        return _bfs_tree(g, seed % g.vertex_count)
    if strategy == "low-stretch-heuristic":
        return _low_stretch_heuristic(g, seed)
    raise ValueError(f"unknown strategy {strategy!r}; choose one of {STRATEGIES}")


def _low_stretch_heuristic(g: Graph, seed):
    """BFS tree from a 1-median of V, improved by one pass of edge swaps."""
    dm = g.distances
    center = int(np.argmin(dm.sum(axis=1)))
    tree = _bfs_tree(g, center)
    best = tree
    best_avg = stretch(g, tree).avg
    rng = np.random.default_rng(seed)
    non_tree = [e for e in g.edges if e not in set(tree.edges)]
    rng.shuffle(non_tree)
    for add in non_tree:
        # adding `add` closes a cycle; try dropping each cycle edge
        path = tree_path(best, add[0], add[1])
        cycle_edges = [
            (a, b) if a < b else (b, a) for a, b in zip(path, path[1:])
        ]
        for drop in cycle_edges:
            cand_edges = tuple(
                sorted((set(best.edges) - {drop}) | {add})
            )
            cand = Graph(g.vertex_count, cand_edges)
            avg = stretch(g, cand).avg
            if avg < best_avg - 1e-12:
                best, best_avg = cand, avg
                break
    return best


def tree_path(t: Graph, u, v):
    """Unique u-v path in a tree, found by BFS from u (no preprocessing)."""
    parent = {u: u}
    frontier = [u]
    while frontier and v not in parent:
        nxt = []
        for a in frontier:
            for b in t.adjacency[a]:
                if b not in parent:
                    parent[b] = a
                    nxt.append(b)
        frontier = nxt
    if v not in parent:
        raise NotSpanning("vertices not connected in the tree")
    path = [v]
    while path[-1] != u:
        path.append(parent[path[-1]])
    path.reverse()
    return path


@dataclass(frozen=True)
class StretchReport:
    avg: float
    max: float
    weighted_avg: float


def stretch(g: Graph, t: Graph, edge_weights=None) -> StretchReport:
    """Pairwise and edge-weighted tree/graph distance ratios (all >= 1).

    weighted_avg is sum_e d_T(u,v) * x_e / sum_e x_e over the graph edges,
    the quantity that bounds transferred LP costs.
    """
    _spanning_tree_check(g, t)
    dg = g.distances
    dt = t.distances
    n = g.vertex_count
    ratios = [
        dt[u, v] / dg[u, v] for u, v in itertools.combinations(range(n), 2)
    ]
    if edge_weights is None:
        edge_weights = [1.0] * len(g.edges)
    wsum = float(sum(edge_weights))
    if wsum <= 0:
        wavg = 1.0
    else:
        wavg = float(
            sum(w * int(dt[u, v]) for (u, v), w in zip(g.edges, edge_weights)) / wsum
        )
    return StretchReport(
        avg=float(np.mean(ratios)) if ratios else 1.0,
        max=float(max(ratios)) if ratios else 1.0,
        weighted_avg=wavg,
    )


def max_stretch_exact(g: Graph, t: Graph) -> Fraction:
    dg = g.distances
    dt = t.distances
    n = g.vertex_count
    return max(
        Fraction(int(dt[u, v]), int(dg[u, v]))
        for u, v in itertools.combinations(range(n), 2)
    )


def transfer_solution(g: Graph, t: Graph, x):
    """Push a per-edge vector of g onto t: each graph edge's mass is added
    along the unique tree path between its endpoints.

    Preserves the value type (int / Fraction / float), so the accounting
    identity sum x' = sum_e d_T(u,v) x_e is exact for exact inputs.
    """
    _spanning_tree_check(g, t)
    xp = [0] * len(t.edges)
    for e_idx, (u, v) in enumerate(g.edges):
        val = x[e_idx]
        if val == 0:
            continue
        path = tree_path(t, u, v)
        for a, b in zip(path, path[1:]):
            te = t.edge_index[(a, b) if a < b else (b, a)]
            xp[te] = xp[te] + val
    return xp


@dataclass(frozen=True)
class TransferReport:
    feasible: bool
    min_margin: float
    cost_x: Fraction
    cost_xp: Fraction
    max_stretch: Fraction
    cost_bound_ok: bool
    accounting_ok: bool
    lp_g: float
    lp_t: float
    lp_t_le_cost: bool

    @property
    def ok(self):
        return (
            self.feasible and self.cost_bound_ok and self.accounting_ok and self.lp_t_le_cost
        )


def verify_transfer(g: Graph, t: Graph, spec: BValueSpec) -> TransferReport:
    """Transfer the optimal lower-program point of g onto t and check:
    feasibility for the tree's program, the stretch cost bound (exactly,
    in rational arithmetic), and that the tree optimum is below the
    transferred cost."""
    _spanning_tree_check(g, t)
    sol = solve(build_lower_lp(g, spec))
    x = [Fraction(max(float(v), 0.0)) for v in sol.values]
    xp = transfer_solution(g, t, x)

    cost_x = sum(x, Fraction(0))
    cost_xp = sum(xp, Fraction(0))
    dt = t.distances
    acct = sum(
        (Fraction(int(dt[u, v])) * x[e] for e, (u, v) in enumerate(g.edges)),
        Fraction(0),
    )
    accounting_ok = acct == cost_xp
    ms = max_stretch_exact(g, t)
    cost_bound_ok = cost_xp <= ms * cost_x

    n = g.vertex_count
    min_margin = float("inf")
    for m in enumerate_cut_masks(n):
        rhs = sum(spec.mask_value(i, int(m), n) for i in range(spec.ell))
        if rhs == 0:
            continue
        lhs = Fraction(0)
        for e, (u, v) in enumerate(t.edges):
            if ((int(m) >> u) & 1) != ((int(m) >> v) & 1):
                lhs += xp[e]
        min_margin = min(min_margin, float(lhs - rhs))
    if min_margin == float("inf"):
        min_margin = 0.0
    feasible = min_margin >= -FLOAT_TOL

    lp_t = float(solve(build_lower_lp(t, spec)).objective)
    return TransferReport(
        feasible=feasible,
        min_margin=min_margin,
        cost_x=cost_x,
        cost_xp=cost_xp,
        max_stretch=ms,
        cost_bound_ok=cost_bound_ok,
        accounting_ok=accounting_ok,
        lp_g=float(sol.objective),
        lp_t=lp_t,
        lp_t_le_cost=lp_t <= float(cost_xp) + FLOAT_TOL,
    )


def best_subtree(g: Graph, x=None, seeds=32, strategies=STRATEGIES):
    """Multi-seed search: the sampled subtree minimizing weighted average
    stretch against the supplied edge vector (uniform when absent)."""
    best = None
    best_key = None
    for strategy in strategies:
        for seed in range(seeds):
            t = sample_subtree(g, strategy=strategy, seed=seed)
            rep = stretch(g, t, edge_weights=x)
            key = (rep.weighted_avg, rep.max, strategy, seed)
            if best_key is None or key < best_key:
                best, best_key = (t, rep), key
    return best
