"""Graphs, terminal groups, Steiner trees, and scalar topology parameters.

All graphs are undirected, unit-weight, and intended to be connected;
connectivity is enforced lazily the first time a distance query runs.
Vertices are the integers ``0 .. vertex_count-1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._accel import bfs_all_pairs
from .errors import (
    DisconnectedGraph,
    EmptyTerminalSet,
    InstanceTooLarge,
    OddTerminalCount,
    OverlappingPairs,
    ParseError,
)

STEINER_EXACT_CAP = 12
MATCHING_EXACT_CAP = 10


def _canon_edge(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected unit-weight graph on vertices 0..vertex_count-1."""

    vertex_count: int
    edges: tuple = ()

    def __post_init__(self):
        if self.vertex_count <= 0:
            raise ValueError("vertex_count must be positive")
        seen = set()
        canon = []
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            e = _canon_edge(u, v)
            if e in seen:
                continue
            seen.add(e)
            canon.append(e)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @cached_property
    def adjacency(self):
        """Sorted neighbor lists, one per vertex."""
        adj = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def _csr(self):
        indptr = np.zeros(self.vertex_count + 1, dtype=np.int64)
        for u, nbrs in enumerate(self.adjacency):
            indptr[u + 1] = indptr[u] + len(nbrs)
        indices = np.fromiter(
            (v for nbrs in self.adjacency for v in nbrs), dtype=np.int64, count=indptr[-1]
        )
        return indptr, indices

    @cached_property
    def distances(self):
        """All-pairs shortest-path matrix; raises if the graph is disconnected."""
        indptr, indices = self._csr
        dist = bfs_all_pairs(indptr, indices, self.vertex_count)
        if (dist < 0).any():
            raise DisconnectedGraph("graph is not connected")
        return dist

    def is_connected(self):
        indptr, indices = self._csr
        dist = bfs_all_pairs(indptr, indices, self.vertex_count)
        return not (dist < 0).any()

    @cached_property
    def edge_index(self):
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def edge_arrays(self):
        eu = np.array([u for u, _ in self.edges], dtype=np.int64)
        ev = np.array([v for _, v in self.edges], dtype=np.int64)
        return eu, ev

    @cached_property
    def _bfs_parents(self):
        """parents[r][v] = predecessor of v on a canonical shortest r-v path.

        BFS explores sorted adjacency, so the parent of each vertex is the
        smallest-index vertex of the previous layer that reaches it.
        """
        n = self.vertex_count
        out = []
        for r in range(n):
            parent = [-1] * n
            parent[r] = r
            frontier = [r]
            while frontier:
                nxt = []
                for u in frontier:
                    for v in self.adjacency[u]:
                        if parent[v] < 0:
                            parent[v] = u
                            nxt.append(v)
                frontier = sorted(nxt)
            out.append(tuple(parent))
        return tuple(out)

    def shortest_path(self, u, v):
        """Canonical shortest path from u to v as a vertex list."""
        self.distances  # connectivity check
        parent = self._bfs_parents[u]
        path = [v]
        while path[-1] != u:
            path.append(parent[path[-1]])
        path.reverse()
        return path

    def is_tree(self):
        return len(self.edges) == self.vertex_count - 1 and self.is_connected()


def shortest_path_matrix(g: Graph):
    """Symmetric all-pairs distance matrix with zero diagonal."""
    return g.distances.copy()


@dataclass(frozen=True)
class GroupedTerminals:
    """Terminal set split into groups K_1..K_t with optional pair matchings.

    Groups are vertex *lists*: a vertex may repeat within or across groups,
    and each occurrence is an independent input slot.  When ``matchings``
    is given it carries one (possibly empty) pair list per group.
    """

    groups: tuple
    matchings: tuple | None = None

    def __post_init__(self):
        if not self.groups:
            raise EmptyTerminalSet("at least one terminal group required")
        groups = tuple(tuple(int(v) for v in grp) for grp in self.groups)
        for i, grp in enumerate(groups):
            if not grp:
                raise EmptyTerminalSet(f"group {i} is empty")
        object.__setattr__(self, "groups", groups)
        if self.matchings is not None:
            if len(self.matchings) != len(groups):
                raise ValueError("matchings must align one-to-one with groups")
            canon = []
            for i, pairs in enumerate(self.matchings):
                members = set(groups[i])
                used = set()
                cpairs = []
                for u, v in pairs:
                    if u == v:
                        raise OverlappingPairs(f"group {i}: pair ({u},{v}) is degenerate")
                    if u not in members or v not in members:
                        raise ValueError(f"group {i}: pair ({u},{v}) not within the group")
                    if u in used or v in used:
                        raise OverlappingPairs(f"group {i}: vertex reused in matching")
                    used.update((u, v))
                    cpairs.append((u, v))
                if cpairs and len(groups[i]) % 2 != 0:
                    raise OddTerminalCount(f"group {i} has odd size but carries a matching")
                canon.append(tuple(cpairs))
            object.__setattr__(self, "matchings", tuple(canon))

    @property
    def group_count(self):
        return len(self.groups)

    @cached_property
    def terminals(self):
        """Flat terminal set (union of all groups), sorted."""
        return tuple(sorted({v for grp in self.groups for v in grp}))

    @cached_property
    def slots(self):
        """All (group, position) input slots in order."""
        return tuple((i, j) for i, grp in enumerate(self.groups) for j in range(len(grp)))

    def slot_vertex(self, slot):
        i, j = slot
        return self.groups[i][j]

    def validate_for(self, g: Graph):
        for grp in self.groups:
            for v in grp:
                if not (0 <= v < g.vertex_count):
                    raise ValueError(f"terminal {v} outside graph")
        return self


@dataclass(frozen=True)
class SteinerTree:
    """A tree subgraph spanning a queried terminal set."""

    edges: tuple
    cost: int
    spans_terminals: bool = True

    def vertices(self):
        return sorted({v for e in self.edges for v in e})

    def adjacency(self):
        adj = {}
        for u, v in self.edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        return {u: sorted(vs) for u, vs in adj.items()}


def _check_terminals(g: Graph, K):
    K = sorted(set(K))
    if not K:
        raise EmptyTerminalSet("terminal set is empty")
    for v in K:
        if not (0 <= v < g.vertex_count):
            raise ValueError(f"terminal {v} outside graph")
    return K


def metric_closure(g: Graph, K):
    """Complete weighted graph on K; weight(u,v) = d_G(u,v)."""
    K = _check_terminals(g, K)
    dm = g.distances
    return {(u, v): int(dm[u, v]) for u, v in itertools.combinations(K, 2)}


def _closure_mst(g: Graph, K):
    """Kruskal MST of the metric closure with (weight, u, v) tie-breaking."""
    K = sorted(set(K))
    closure = metric_closure(g, K)
    parent = {v: v for v in K}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    mst = []
    for (u, v), w in sorted(closure.items(), key=lambda it: (it[1], it[0])):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            mst.append((u, v, w))
    return mst


def _refined_vertex_order(g: Graph, K):
    """Label-free vertex order: iterated refinement of distance profiles
    seeded with terminal membership.  Vertices tied at the fixpoint are
    structurally interchangeable for tie-breaking purposes."""
    n = g.vertex_count
    dm = g.distances
    kset = set(K)
    colors = [(v in kset, len(g.adjacency[v])) for v in range(n)]
    for _ in range(n):
        keys = [
            (colors[v], tuple(sorted((int(dm[v, u]), colors[u]) for u in range(n) if u != v)))
            for v in range(n)
        ]
        ranks = {key: i for i, key in enumerate(sorted(set(keys)))}
        new_colors = [ranks[k] for k in keys]
        if new_colors == colors:
            break
        colors = new_colors
    return sorted(range(n), key=lambda v: (colors[v], v))


def steiner_tree_approx(g: Graph, K) -> SteinerTree:
    """2-approximate Steiner tree: MST of the metric closure, mapped back
    through canonical shortest paths, spanning-tree extracted, and pruned.

    Tie-breaking runs on a structurally canonical relabeling so the cost
    does not depend on the input labeling.
    """
    K = _check_terminals(g, K)
    if len(K) == 1:
        return SteinerTree(edges=(), cost=0)
    order = _refined_vertex_order(g, K)
    to_canon = {v: i for i, v in enumerate(order)}
    gc = Graph(g.vertex_count, tuple((to_canon[u], to_canon[v]) for u, v in g.edges))
    tree_c = _steiner_approx_raw(gc, [to_canon[v] for v in K])
    edges = tuple(
        sorted(_canon_edge(order[u], order[v]) for u, v in tree_c.edges)
    )
    return SteinerTree(edges=edges, cost=len(edges))


def _steiner_approx_raw(g: Graph, K) -> SteinerTree:
    K = sorted(set(K))
    union_edges = set()
    for u, v, _w in _closure_mst(g, K):
        path = g.shortest_path(u, v)
        for a, b in zip(path, path[1:]):
            union_edges.add(_canon_edge(a, b))

    # spanning tree of the union subgraph (BFS from the smallest terminal)
    adj = {}
    for u, v in union_edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    root = K[0]
    seen = {root}
    tree = set()
    frontier = [root]
    while frontier:
        nxt = []
        for u in sorted(frontier):
            for v in sorted(adj.get(u, ())):
                if v not in seen:
                    seen.add(v)
                    tree.add(_canon_edge(u, v))
                    nxt.append(v)
        frontier = nxt

    # prune non-terminal leaves until fixpoint
    kset = set(K)
    changed = True
    while changed:
        changed = False
        deg = {}
        for u, v in tree:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        for e in sorted(tree):
            u, v = e
            if (deg[u] == 1 and u not in kset) or (deg[v] == 1 and v not in kset):
                tree.remove(e)
                changed = True
                break
    edges = tuple(sorted(tree))
    return SteinerTree(edges=edges, cost=len(edges))


def steiner_tree_exact(g: Graph, K) -> SteinerTree:
    """Minimum Steiner tree by enumerating Steiner-point subsets.

    Unit weights make the cost of any connected vertex set W equal to
    |W| - 1, so scanning candidate sets K ∪ S in order of |S| finds the
    optimum at the first connected hit.
    """
    if g.vertex_count > STEINER_EXACT_CAP:
        raise InstanceTooLarge(
            f"exact Steiner enumeration capped at |V| <= {STEINER_EXACT_CAP}"
        )
    K = _check_terminals(g, K)
    g.distances  # connectivity check
    if len(K) == 1:
        return SteinerTree(edges=(), cost=0)
    others = [v for v in range(g.vertex_count) if v not in set(K)]
    for size in range(len(others) + 1):
        for S in itertools.combinations(others, size):
            W = set(K) | set(S)
            # BFS inside W
            root = K[0]
            seen = {root}
            tree = []
            frontier = [root]
            while frontier:
                nxt = []
                for u in sorted(frontier):
                    for v in g.adjacency[u]:
                        if v in W and v not in seen:
                            seen.add(v)
                            tree.append(_canon_edge(u, v))
                            nxt.append(v)
                frontier = nxt
            if len(seen) == len(W):
                return SteinerTree(edges=tuple(sorted(tree)), cost=len(tree))
    raise DisconnectedGraph("terminals cannot be connected")  # pragma: no cover


def sigma(g: Graph, K):
    """Minimum status and its median: min over v of sum of distances to K.

    K may be a multiset (a list with repeats); each occurrence contributes
    its own distance term.  Ties break toward the smallest vertex index.
    """
    K = list(K)
    if not K:
        raise EmptyTerminalSet("terminal set is empty")
    for v in K:
        if not (0 <= v < g.vertex_count):
            raise ValueError(f"terminal {v} outside graph")
    dm = g.distances
    statuses = dm[:, K].sum(axis=1)
    median = int(np.argmin(statuses))
    return int(statuses[median]), median


def sigma_grouped(g: Graph, groups: GroupedTerminals):
    """min over v of the sum over groups of the distance to the nearest
    group member (equivalently: the best median over one-representative-
    per-group choices)."""
    groups.validate_for(g)
    dm = g.distances
    per_group = np.stack(
        [dm[:, sorted(set(grp))].min(axis=1) for grp in groups.groups], axis=1
    )
    totals = per_group.sum(axis=1)
    return int(totals.min())


def grouped_median_and_representatives(g: Graph, groups: GroupedTerminals):
    """The (median, representatives) pair attaining sigma_grouped,
    with smallest-index tie-breaking."""
    groups.validate_for(g)
    dm = g.distances
    per_group = np.stack(
        [dm[:, sorted(set(grp))].min(axis=1) for grp in groups.groups], axis=1
    )
    totals = per_group.sum(axis=1)
    median = int(np.argmin(totals))
    reps = []
    for grp in groups.groups:
        members = sorted(set(grp))
        best = min(members, key=lambda u: (dm[median, u], u))
        reps.append(best)
    return median, tuple(reps)


def matching_distance(g: Graph, M):
    """Sum of endpoint distances over a disjoint pair list."""
    used = set()
    for u, v in M:
        if u == v or u in used or v in used:
            raise OverlappingPairs(f"pair ({u},{v}) overlaps another pair")
        used.update((u, v))
    dm = g.distances
    return int(sum(dm[u, v] for u, v in M))


@dataclass(frozen=True)
class WorstMatching:
    pairs: tuple
    value: int
    exact: bool


def _all_pairings(items):
    if not items:
        yield ()
        return
    first = items[0]
    for j in range(1, len(items)):
        rest = items[1:j] + items[j + 1:]
        for sub in _all_pairings(rest):
            yield ((first, items[j]),) + sub


def worst_case_matching(g: Graph, K) -> WorstMatching:
    """Maximum-total-distance perfect matching of K.

    Exact enumeration up to |K| <= 10; larger sets fall back to greedy
    farthest-pair matching flagged as heuristic.
    """
    K = _check_terminals(g, K)
    if len(K) % 2 != 0:
        raise OddTerminalCount("worst-case matching needs an even terminal count")
    dm = g.distances
    if len(K) <= MATCHING_EXACT_CAP:
        best = None
        best_val = -1
        for pairing in _all_pairings(tuple(K)):
            val = sum(int(dm[u, v]) for u, v in pairing)
            if val > best_val:
                best, best_val = pairing, val
        return WorstMatching(pairs=best, value=best_val, exact=True)
    remaining = list(K)
    pairs = []
    total = 0
    while remaining:
        u, v = max(
            ((a, b) for a, b in itertools.combinations(remaining, 2)),
            key=lambda e: (dm[e[0], e[1]], -e[0], -e[1]),
        )
        pairs.append((u, v))
        total += int(dm[u, v])
        remaining.remove(u)
        remaining.remove(v)
    return WorstMatching(pairs=tuple(pairs), value=total, exact=False)


# ---------------------------------------------------------------------------
# fixtures and file format


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def star_graph(leaves):
    return Graph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def cycle_graph(n):
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def grid_graph(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, tuple(edges))


def random_connected_graph(n, p=0.4, seed=0):
    """Erdős–Rényi G(n, p) resampled until connected."""
    rng = np.random.default_rng(seed)
    while True:
        edges = [
            (u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p
        ]
        g = Graph(n, tuple(edges))
        if g.is_connected():
            return g


def random_tree(n, seed=0):
    """Uniform-ish random tree: each vertex attaches to a random earlier one."""
    rng = np.random.default_rng(seed)
    edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    return Graph(n, tuple(edges))


def parse_graph_text(text):
    """Parse the graph text format.

    Lines: ``p <nv> <ne>``, ``e <u> <v>``, ``t <group> <vertex>``,
    ``m <group> <u> <v>``; ``#`` starts a comment.  Returns
    (Graph, GroupedTerminals or None).
    """
    nv = None
    ne = None
    edges = []
    group_terms = {}
    group_pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "p":
                if nv is not None:
                    raise ParseError("duplicate problem line", lineno)
                if len(parts) != 3:
                    raise ParseError("problem line needs 2 integers", lineno)
                nv, ne = int(parts[1]), int(parts[2])
            elif tag == "e":
                if len(parts) != 3:
                    raise ParseError("edge line needs 2 integers", lineno)
                edges.append((int(parts[1]), int(parts[2])))
            elif tag == "t":
                if len(parts) != 3:
                    raise ParseError("terminal line needs 2 integers", lineno)
                group_terms.setdefault(int(parts[1]), []).append(int(parts[2]))
            elif tag == "m":
                if len(parts) != 4:
                    raise ParseError("matching line needs 3 integers", lineno)
                group_pairs.setdefault(int(parts[1]), []).append(
                    (int(parts[2]), int(parts[3]))
                )
            else:
                raise ParseError(f"unknown line tag {tag!r}", lineno)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from exc
    if nv is None:
        raise ParseError("missing problem line", 0)
    if ne is not None and ne != len(edges):
        raise ParseError(f"expected {ne} edges, found {len(edges)}", 0)
    try:
        g = Graph(nv, tuple(edges))
    except ValueError as exc:
        raise ParseError(str(exc), 0) from exc
    groups = None
    if group_terms:
        ids = sorted(group_terms)
        matchings = None
        if group_pairs:
            for gid in group_pairs:
                if gid not in group_terms:
                    raise ParseError(f"matching for unknown group {gid}", 0)
            matchings = tuple(tuple(group_pairs.get(gid, ())) for gid in ids)
        groups = GroupedTerminals(
            groups=tuple(tuple(group_terms[gid]) for gid in ids), matchings=matchings
        )
        groups.validate_for(g)
    return g, groups


def load_graph_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph_text(fh.read())
