"""Cuts, multicuts, per-cut demand (b-value) families, and cut collections."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._accel import pair_separation_counts
from .errors import BudgetExceeded, InstanceTooLarge
from .graph import Graph, GroupedTerminals

CUT_ENUM_CAP = 16
SUBADD_CAP = 12


@dataclass(frozen=True)
class Cut:
    """Unordered bipartition of the vertex set, stored by the side
    containing vertex 0."""

    vertex_count: int
    side: frozenset

    def __post_init__(self):
        side = frozenset(int(v) for v in self.side)
        if not side or len(side) >= self.vertex_count:
            raise ValueError("cut side must be a nonempty proper subset")
        for v in side:
            if not (0 <= v < self.vertex_count):
                raise ValueError(f"vertex {v} outside graph")
        if 0 not in side:
            side = frozenset(range(self.vertex_count)) - side
        object.__setattr__(self, "side", side)

    @classmethod
    def from_mask(cls, vertex_count, mask):
        return cls(vertex_count, frozenset(v for v in range(vertex_count) if (mask >> v) & 1))

    @cached_property
    def mask(self):
        m = 0
        for v in self.side:
            m |= 1 << v
        return m

    @property
    def complement(self):
        return frozenset(range(self.vertex_count)) - self.side

    def separates(self, u, v):
        return (u in self.side) != (v in self.side)


@dataclass(frozen=True)
class Multicut:
    """Partition-style cut: disjoint explicit vertex sets; the implicit
    set is the complement of their union."""

    vertex_count: int
    explicit_sets: tuple

    def __post_init__(self):
        sets = tuple(frozenset(int(v) for v in s) for s in self.explicit_sets)
        if not sets:
            raise ValueError("multicut needs at least one explicit set")
        seen = set()
        for s in sets:
            if not s:
                raise ValueError("explicit sets must be nonempty")
            if seen & s:
                raise ValueError("explicit sets must be pairwise disjoint")
            seen |= s
            for v in s:
                if not (0 <= v < self.vertex_count):
                    raise ValueError(f"vertex {v} outside graph")
        object.__setattr__(
            self, "explicit_sets", tuple(sorted(sets, key=lambda s: sorted(s)))
        )

    @property
    def size(self):
        return len(self.explicit_sets)

    @cached_property
    def implicit_set(self):
        union = set()
        for s in self.explicit_sets:
            union |= s
        return frozenset(range(self.vertex_count)) - union

    def part_of(self, v):
        """Index of the explicit set containing v, or -1 for the implicit set."""
        for i, s in enumerate(self.explicit_sets):
            if v in s:
                return i
        return -1


@dataclass(frozen=True)
class BValueSpec:
    """A family of per-cut demand functions b^1..b^ell.

    Each evaluator maps a Cut to a nonnegative value; by construction the
    value depends only on the unordered bipartition.  ``data`` keeps the
    structured description (terminal sets / matchings) so LP builders can
    work on bitmasks directly.
    """

    label: str
    kind: str  # "steiner" | "mdn" | "match" | "custom"
    data: tuple = ()
    custom: tuple = ()

    @property
    def ell(self):
        if self.kind == "custom":
            return len(self.custom)
        return len(self.data)

    def value(self, i, cut: Cut):
        if self.kind == "steiner":
            return b_steiner(cut, self.data[i])
        if self.kind == "mdn":
            return b_mdn(cut, self.data[i])
        if self.kind == "match":
            return b_match(cut, self.data[i])
        return self.custom[i](cut)

    def values(self, cut: Cut):
        return tuple(self.value(i, cut) for i in range(self.ell))

    def total(self, cut: Cut):
        return sum(self.values(cut))

    def mask_value(self, i, mask, n):
        """Same as value() but on a raw side bitmask (either orientation)."""
        if self.kind == "steiner":
            tmask = _set_mask(self.data[i])
            inside = mask & tmask
            return 1 if inside != 0 and inside != tmask else 0
        if self.kind == "mdn":
            tmask = _set_mask(self.data[i])
            inside = bin(mask & tmask).count("1")
            k = len(self.data[i])
            return min(inside, k - inside)
        if self.kind == "match":
            cnt = 0
            for u, v in self.data[i]:
                if ((mask >> u) & 1) != ((mask >> v) & 1):
                    cnt += 1
            return cnt
        return self.custom[i](Cut.from_mask(n, mask))


def _set_mask(vertices):
    m = 0
    for v in set(vertices):
        m |= 1 << v
    return m


def spec_steiner(terminal_sets, label="steiner"):
    """b^i(C) = 1 iff C separates the i-th terminal set."""
    return BValueSpec(
        label=label, kind="steiner", data=tuple(tuple(sorted(set(t))) for t in terminal_sets)
    )


def spec_mdn(K, label="mdn"):
    """Single demand: min(|side ∩ K|, |K \\ side|)."""
    return BValueSpec(label=label, kind="mdn", data=(tuple(sorted(set(K))),))


def spec_match(matchings, label="match"):
    """b^i(C) = number of pairs of M_i separated by C."""
    return BValueSpec(
        label=label, kind="match", data=tuple(tuple(tuple(p) for p in m) for m in matchings)
    )


def spec_grouped(groups: GroupedTerminals, label="grouped"):
    """Steiner family with one separation indicator per terminal group."""
    return spec_steiner([set(grp) for grp in groups.groups], label=label)


def spec_custom(evaluators, label="custom"):
    return BValueSpec(label=label, kind="custom", custom=tuple(evaluators))


# ---------------------------------------------------------------------------
# basic cut operations


def enumerate_cuts(g: Graph):
    """All 2^(n-1) - 1 unordered bipartitions, canonical side first."""
    n = g.vertex_count
    if n > CUT_ENUM_CAP:
        raise InstanceTooLarge(f"cut enumeration capped at |V| <= {CUT_ENUM_CAP}")
    for rest in range(2 ** (n - 1) - 1):
        yield Cut.from_mask(n, (rest << 1) | 1)


def enumerate_cut_masks(n):
    """Canonical side bitmasks (vertex 0 inside) of all cuts, as an array."""
    if n > CUT_ENUM_CAP:
        raise InstanceTooLarge(f"cut enumeration capped at |V| <= {CUT_ENUM_CAP}")
    rest = np.arange(2 ** (n - 1) - 1, dtype=np.int64)
    return (rest << 1) | 1


def crossing_edges(g: Graph, c):
    """Edges with endpoints in different parts of a Cut or Multicut."""
    if isinstance(c, Cut):
        return tuple(e for e in g.edges if c.separates(*e))
    out = []
    for u, v in g.edges:
        pu, pv = c.part_of(u), c.part_of(v)
        if pu == pv:
            continue
        if pu >= 0 or pv >= 0:
            out.append((u, v))
    return tuple(out)


def b_steiner(c: Cut, T):
    T = set(T)
    inside = T & c.side
    return 1 if inside and inside != T else 0


def b_mdn(c: Cut, K):
    K = set(K)
    a = len(K & c.side)
    return min(a, len(K) - a)


def b_match(c: Cut, M):
    return sum(1 for u, v in M if c.separates(u, v))


def b_grouped(c: Cut, groups: GroupedTerminals):
    return sum(b_steiner(c, set(grp)) for grp in groups.groups)


# ---------------------------------------------------------------------------
# sub-additivity refutation search


@dataclass(frozen=True)
class SubadditivityReport:
    checked_triples: int
    violations: tuple

    @property
    def ok(self):
        return not self.violations


def check_subadditive(g: Graph, spec: BValueSpec) -> SubadditivityReport:
    """Exhaustively search side-triples S3 = S1 ⊔ S2 for violations of
    b^i(C3) <= b^i(C1) + b^i(C2)."""
    n = g.vertex_count
    if n > SUBADD_CAP:
        raise InstanceTooLarge(f"sub-additivity check capped at |V| <= {SUBADD_CAP}")
    full = (1 << n) - 1
    violations = []
    checked = 0
    for s3 in range(1, full):
        # enumerate submasks s1 of s3 with s2 = s3 \ s1
        s1 = (s3 - 1) & s3
        while s1 > 0:
            s2 = s3 & ~s1
            if s1 < s2:  # unordered pair (S1, S2)
                s1 = (s1 - 1) & s3
                continue
            checked += 1
            for i in range(spec.ell):
                v3 = spec.mask_value(i, s3, n)
                if v3 == 0:
                    continue
                v1 = spec.mask_value(i, s1, n)
                v2 = spec.mask_value(i, s2, n)
                if v3 > v1 + v2:
                    violations.append(
                        (
                            i,
                            frozenset(v for v in range(n) if (s1 >> v) & 1),
                            frozenset(v for v in range(n) if (s2 >> v) & 1),
                            (v1, v2, v3),
                        )
                    )
            s1 = (s1 - 1) & s3
    return SubadditivityReport(checked_triples=checked, violations=tuple(violations))


# ---------------------------------------------------------------------------
# threshold-cut collections with a checked separation certificate


def bourgain_cut_collection(g: Graph, seed=0, sets_per_scale=None, budget=64):
    """Threshold cuts of distances to random vertex subsets, resampled
    until every pair (u,v) is separated at least d_G(u,v) times.

    Returns (cuts, beta) where beta is the measured maximum number of
    collection cuts crossing any single edge.
    """
    n = g.vertex_count
    dm = g.distances
    if n == 1:
        raise ValueError("graph has no cuts")
    scales = max(1, int(np.ceil(np.log2(n))))
    q = sets_per_scale if sets_per_scale is not None else 2 * scales + 2
    eu, ev = g.edge_arrays
    for attempt in range(budget):
        rng = np.random.default_rng((seed, attempt))
        masks = []
        for j in range(scales + 1):
            size = min(2 ** j, n)
            for _ in range(q):
                A = rng.choice(n, size=size, replace=False)
                f = dm[:, A].min(axis=1)
                for theta in range(int(f.max())):
                    mask = 0
                    for v in range(n):
                        if f[v] <= theta:
                            mask |= 1 << v
                    if 0 < mask < (1 << n) - 1:
                        masks.append(mask)
        if not masks:
            continue
        full = (1 << n) - 1
        canon = {m if m & 1 else m ^ full for m in masks}
        arr = np.array(sorted(canon), dtype=np.int64)
        counts = pair_separation_counts(arr, n)
        if (counts >= dm).all():
            crossing = (((arr[:, None] >> eu[None, :]) ^ (arr[:, None] >> ev[None, :])) & 1)
            beta = int(crossing.sum(axis=0).max())
            cuts = tuple(Cut.from_mask(n, int(m)) for m in arr)
            return cuts, beta
    raise BudgetExceeded(f"no valid cut collection within {budget} resampling attempts")


def verify_separation(g: Graph, cuts):
    """Post-hoc scan: does the collection separate every pair (u,v) at
    least d_G(u,v) times?"""
    n = g.vertex_count
    arr = np.array([c.mask for c in cuts], dtype=np.int64)
    counts = pair_separation_counts(arr, n)
    return bool((counts >= g.distances).all())


def cuts_to_json(cuts):
    return [sorted(c.side) for c in cuts]
