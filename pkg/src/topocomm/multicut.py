"""Ball-growing multicut sequences and (ell, alpha) multicut families.

The construction grows balls of radius i-1 around a coarsening partition
of the terminal set: partitions merge when their radius-i balls touch,
which mirrors component merging of an MST computation on the terminal
metric closure.  Chunking the resulting nested multicuts at the 1/3-
singleton threshold yields the (ell, 1/3) family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .cuts import Multicut, crossing_edges
from .errors import EmptySet, TooFewTerminals
from .graph import Graph, _check_terminals, _closure_mst, steiner_tree_approx, steiner_tree_exact


def ball(g: Graph, S, r):
    """Vertices within distance r of the set S."""
    S = set(S)
    if not S:
        raise EmptySet("ball of an empty set")
    dm = g.distances
    cols = sorted(S)
    return frozenset(
        int(v) for v in range(g.vertex_count) if dm[v, cols].min() <= r
    )


def build_partition_sequence(g: Graph, K):
    """Partitions S_1..S_{t+1} of K: start from singletons, merge parts
    whose radius-i balls intersect (transitively), stop when one part
    remains."""
    K = _check_terminals(g, K)
    if len(K) < 2:
        raise TooFewTerminals("partition sequence needs at least 2 terminals")
    parts = [frozenset({v}) for v in K]
    seq = [tuple(sorted(parts, key=sorted))]
    radius = 0
    while len(parts) > 1:
        radius += 1
        balls = [ball(g, p, radius) for p in parts]
        # connected components of the ball-intersection graph
        comp = list(range(len(parts)))

        def find(i):
            while comp[i] != i:
                comp[i] = comp[comp[i]]
                i = comp[i]
            return i

        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                if balls[i] & balls[j]:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        comp[ri] = rj
        merged = {}
        for i, p in enumerate(parts):
            merged.setdefault(find(i), set()).update(p)
        parts = [frozenset(s) for s in merged.values()]
        seq.append(tuple(sorted(parts, key=sorted)))
    return seq


def build_multicuts(g: Graph, K):
    """Multicuts C_1..C_t: explicit sets are balls of radius i-1 around
    the parts of S_i (ball disjointness is inherited from the merge rule)."""
    seq = build_partition_sequence(g, K)
    t = len(seq) - 1
    cuts = []
    for i in range(1, t + 1):
        explicit = tuple(ball(g, p, i - 1) for p in seq[i - 1])
        cuts.append(Multicut(g.vertex_count, explicit))
    return cuts


@dataclass(frozen=True)
class MulticutFamily:
    collections: tuple  # tuple of tuples of Multicut
    alpha: Fraction
    singleton_counts: tuple

    @property
    def ell(self):
        return len(self.collections)


def _singleton_count(first: Multicut, last: Multicut):
    """Explicit sets of `last` containing exactly one explicit set of `first`."""
    count = 0
    for s in last.explicit_sets:
        inside = sum(1 for b in first.explicit_sets if b <= s)
        if inside == 1:
            count += 1
    return count


def chunk_into_family(g: Graph, K) -> MulticutFamily:
    """Greedy chunking of the multicut sequence at the 1/3-singleton
    threshold; each chunk restarts with the merged partition as its
    terminal ground set."""
    K = _check_terminals(g, K)
    if len(K) < 2:
        raise TooFewTerminals("family construction needs at least 2 terminals")
    seq = build_partition_sequence(g, K)
    cuts = build_multicuts(g, K)
    t = len(cuts)

    def singles(idx, base_idx):
        base = set(seq[base_idx])
        return sum(1 for p in seq[idx] if p in base)

    collections = []
    counts = []
    base = 0  # index into seq (0-based: seq[i] is S_{i+1})
    while base < t:
        k_here = len(seq[base])
        j = base
        for cand in range(base, t):
            if 3 * singles(cand, base) >= k_here:
                j = cand
            else:
                break
        chunk = tuple(cuts[base:j + 1])
        collections.append(chunk)
        counts.append(_singleton_count(chunk[0], chunk[-1]))
        base = j + 1
    return MulticutFamily(
        collections=tuple(collections),
        alpha=Fraction(1, 3),
        singleton_counts=tuple(counts),
    )


@dataclass(frozen=True)
class FamilyReport:
    containment: tuple
    disjointness: tuple
    singleton: tuple

    @property
    def ok(self):
        return all(self.containment) and all(self.disjointness) and all(self.singleton)


def _contained_in(c: Multicut, d: Multicut):
    """True when every explicit set of d is a union of one or more explicit
    sets of c plus vertices from c's implicit set."""
    for s in d.explicit_sets:
        inside = 0
        for b in c.explicit_sets:
            if b <= s:
                inside += 1
            elif b & s:
                return False  # partial overlap
        if inside == 0:
            return False
    return True


def verify_family(g: Graph, fam: MulticutFamily, alpha=None) -> FamilyReport:
    """Literal set-computation check of the three family properties."""
    alpha = fam.alpha if alpha is None else alpha
    containment = []
    disjointness = []
    singleton = []
    for chunk in fam.collections:
        cont = all(
            _contained_in(chunk[j], chunk[j + 1]) for j in range(len(chunk) - 1)
        )
        containment.append(cont)
        edge_sets = [set(crossing_edges(g, c)) for c in chunk]
        disj = True
        for a in range(len(edge_sets)):
            for b in range(a + 1, len(edge_sets)):
                if edge_sets[a] & edge_sets[b]:
                    disj = False
        disjointness.append(disj)
        count = _singleton_count(chunk[0], chunk[-1])
        singleton.append(count >= alpha * chunk[0].size)
    return FamilyReport(
        containment=tuple(containment),
        disjointness=tuple(disjointness),
        singleton=tuple(singleton),
    )


@dataclass(frozen=True)
class FamilyCostReport:
    sum_sizes: int
    mst_closure_cost: int
    steiner_cost: int
    steiner_exact: bool

    @property
    def ok(self):
        return 2 * self.sum_sizes >= self.mst_closure_cost


def family_cost_check(g: Graph, K) -> FamilyCostReport:
    """Sum of multicut sizes over the pre-chunk sequence against the MST
    of the terminal metric closure (which itself dominates the Steiner
    cost)."""
    cuts = build_multicuts(g, K)
    sum_sizes = sum(c.size for c in cuts)
    mst_cost = sum(w for _u, _v, w in _closure_mst(g, K))
    if g.vertex_count <= 12:
        st = steiner_tree_exact(g, K)
        exact = True
    else:
        st = steiner_tree_approx(g, K)
        exact = False
    return FamilyCostReport(
        sum_sizes=sum_sizes,
        mst_closure_cost=int(mst_cost),
        steiner_cost=st.cost,
        steiner_exact=exact,
    )


def ell_bound(k):
    """Chunk-count ceiling: terminals shrink by >= 3/2 per chunk."""
    return int(math.ceil(math.log(max(k, 2)) / math.log(1.5))) + 1


def boruvka_mst_edges(g: Graph, K):
    """Direct Borůvka on the terminal metric closure: each round every
    component picks its cheapest outgoing closure edge.  Returns the
    chosen (u, v, weight) edges."""
    K = sorted(set(K))
    dm = g.distances
    parent = {v: v for v in K}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    picked = []
    comps = len(K)
    while comps > 1:
        cheapest = {}
        for i, u in enumerate(K):
            for v in K[i + 1:]:
                ru, rv = find(u), find(v)
                if ru == rv:
                    continue
                w = int(dm[u, v])
                key = (w, u, v)
                if ru not in cheapest or key < cheapest[ru]:
                    cheapest[ru] = key
                if rv not in cheapest or key < cheapest[rv]:
                    cheapest[rv] = key
        for w, u, v in sorted(set(cheapest.values())):
            if find(u) != find(v):
                parent[find(u)] = find(v)
                picked.append((u, v, w))
                comps -= 1
    return picked


def boruvka_threshold_partition(g: Graph, K, threshold):
    """Components of the terminal closure under Borůvka MST edges of
    weight <= threshold (the independent oracle for the merge schedule)."""
    K = sorted(set(K))
    parent = {v: v for v in K}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v, w in boruvka_mst_edges(g, K):
        if w <= threshold:
            parent[find(u)] = find(v)
    comps = {}
    for v in K:
        comps.setdefault(find(v), set()).add(v)
    return tuple(sorted((frozenset(s) for s in comps.values()), key=sorted))


def refines(finer, coarser):
    """Every part of `finer` lies inside some part of `coarser`."""
    return all(any(p <= q for q in coarser) for p in finer)


def family_to_json(fam: MulticutFamily):
    return {
        "alpha": [fam.alpha.numerator, fam.alpha.denominator],
        "ell": fam.ell,
        "singleton_counts": list(fam.singleton_counts),
        "collections": [
            [[sorted(s) for s in mc.explicit_sets] for mc in chunk]
            for chunk in fam.collections
        ],
    }
