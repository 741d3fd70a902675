"""Cut-covering linear programs.

Two program shapes over the same graph and demand family b^1..b^ell:

* lower:  min sum_e x_e      s.t.  sum_{e in delta(C)} x_e      >= sum_i b^i(C)
* upper:  min sum_{i,e} x_ie s.t.  sum_{e in delta(C)} x_{i,e}  >= b^i(C)

The upper program is separable across i and is solved block-by-block.
Float solves go through scipy's HiGHS; exact rational solves run a small
dense simplex on the dual (which has only |E| rows), so values like 3/2
can be pinned exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from ._accel import crossing_mass
from .cuts import (
    BValueSpec,
    enumerate_cut_masks,
    spec_match,
    spec_mdn,
    spec_steiner,
)
from .errors import (
    Infeasible,
    InstanceTooLarge,
    IterationLimit,
    MissingMatchings,
    NotATree,
)
from .graph import Graph, GroupedTerminals, steiner_tree_approx

FLOAT_TOL = 1e-6
EXACT_EDGE_CAP = 12


@dataclass
class LPInstance:
    """A materialized (or lazily-separable) cut-covering LP."""

    kind: str  # "lower" | "upper"
    graph: Graph
    spec: BValueSpec
    # one row per constraint: (side mask, block index or -1, rhs)
    masks: np.ndarray | None = None
    blocks: np.ndarray | None = None
    rhs: list = field(default_factory=list)
    lazy: bool = False  # constraints left to a separation oracle

    @property
    def num_vars(self):
        ne = len(self.graph.edges)
        return ne if self.kind == "lower" else ne * self.spec.ell

    @property
    def num_constraints(self):
        return 0 if self.masks is None else len(self.masks)


@dataclass
class LPSolution:
    values: object  # numpy array (float mode) or list of Fractions
    objective: object
    feasibility_margin: object
    solver_status: str
    kind: str = "lower"
    exact: bool = False


def _positive_rows_lower(g: Graph, spec: BValueSpec):
    n = g.vertex_count
    masks = enumerate_cut_masks(n)
    keep = []
    rhs = []
    for m in masks:
        total = 0
        for i in range(spec.ell):
            total += spec.mask_value(i, int(m), n)
        if total > 0:
            keep.append(int(m))
            rhs.append(total)
    return np.array(keep, dtype=np.int64), rhs


def _positive_rows_upper(g: Graph, spec: BValueSpec):
    n = g.vertex_count
    masks = enumerate_cut_masks(n)
    keep = []
    blocks = []
    rhs = []
    for m in masks:
        for i in range(spec.ell):
            v = spec.mask_value(i, int(m), n)
            if v > 0:
                keep.append(int(m))
                blocks.append(i)
                rhs.append(v)
    return np.array(keep, dtype=np.int64), np.array(blocks, dtype=np.int64), rhs


def build_lower_lp(g: Graph, spec: BValueSpec) -> LPInstance:
    """One variable per edge; a constraint per cut with positive summed demand."""
    if g.vertex_count > 16:
        if spec.kind == "steiner" and spec.ell == 1:
            return LPInstance(kind="lower", graph=g, spec=spec, lazy=True)
        raise InstanceTooLarge(
            "cut enumeration needs |V| <= 16 (separation only available for "
            "single Steiner demands)"
        )
    masks, rhs = _positive_rows_lower(g, spec)
    return LPInstance(kind="lower", graph=g, spec=spec, masks=masks, rhs=rhs)


def build_upper_lp(g: Graph, spec: BValueSpec) -> LPInstance:
    """ell * |E| variables; a constraint per (cut, i) with b^i(C) > 0."""
    if g.vertex_count > 16:
        if spec.kind == "steiner":
            return LPInstance(kind="upper", graph=g, spec=spec, lazy=True)
        raise InstanceTooLarge(
            "cut enumeration needs |V| <= 16 (separation only available for "
            "Steiner demands)"
        )
    masks, blocks, rhs = _positive_rows_upper(g, spec)
    return LPInstance(kind="upper", graph=g, spec=spec, masks=masks, blocks=blocks, rhs=rhs)


# ---------------------------------------------------------------------------
# float path (scipy / HiGHS)


def _crossing_matrix(g: Graph, masks):
    eu, ev = g.edge_arrays
    return (((masks[:, None] >> eu[None, :]) ^ (masks[:, None] >> ev[None, :])) & 1).astype(
        np.float64
    )


def _solve_cover_float(g: Graph, masks, rhs):
    """min 1.x s.t. crossing(mask).x >= rhs, x >= 0."""
    ne = len(g.edges)
    if len(masks) == 0:
        return np.zeros(ne), 0.0, math.inf
    A = _crossing_matrix(g, masks)
    b = np.array([float(v) for v in rhs])
    res = linprog(
        c=np.ones(ne), A_ub=-A, b_ub=-b, bounds=(0, None), method="highs"
    )
    if res.status == 1:
        raise IterationLimit("LP solver hit its iteration limit")
    if res.status != 0:
        raise Infeasible(
            f"covering LP reported status {res.status}; this cannot happen for "
            "nonnegative demands and indicates an internal error"
        )
    x = np.maximum(res.x, 0.0)
    margin = float((A @ x - b).min())
    return x, float(res.fun), margin


# ---------------------------------------------------------------------------
# exact rational path: primal simplex on the dual
#
# dual:  max b.y  s.t.  for each edge e: sum_{rows r crossing e} y_r <= 1
# The all-slack basis is feasible, Bland's rule guarantees termination,
# and the primal optimum x is read off the slack columns' reduced costs.


def _solve_cover_exact(g: Graph, masks, rhs):
    ne = len(g.edges)
    if ne > EXACT_EDGE_CAP:
        raise InstanceTooLarge(f"exact rational mode capped at |E| <= {EXACT_EDGE_CAP}")
    m = len(masks)
    if m == 0:
        return [Fraction(0)] * ne, Fraction(0), None
    eu, ev = g.edge_arrays
    cross = (((masks[:, None] >> eu[None, :]) ^ (masks[:, None] >> ev[None, :])) & 1)
    ncols = m + ne  # dual vars then slacks
    tab = [[Fraction(0)] * (ncols + 1) for _ in range(ne)]
    for e in range(ne):
        for r in range(m):
            if cross[r, e]:
                tab[e][r] = Fraction(1)
        tab[e][m + e] = Fraction(1)
        tab[e][ncols] = Fraction(1)
    cost = [Fraction(v) for v in rhs] + [Fraction(0)] * ne
    # objective row holds z_j - c_j; starts at -c_j for the all-slack basis
    obj = [-c for c in cost] + [Fraction(0)]
    basis = list(range(m, m + ne))
    max_pivots = 50000
    for _ in range(max_pivots):
        enter = -1
        for j in range(ncols):
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(ne):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][ncols] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            raise Infeasible("dual unbounded; internal error for covering LPs")
        piv = tab[leave][enter]
        row = tab[leave]
        tab[leave] = [v / piv for v in row]
        for i in range(ne):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [a - f * b for a, b in zip(tab[i], tab[leave])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, tab[leave])]
        basis[leave] = enter
    else:
        raise IterationLimit("exact simplex exceeded its pivot budget")
    objective = obj[ncols]
    x = [obj[m + e] for e in range(ne)]
    return x, objective, None


# ---------------------------------------------------------------------------
# constraint generation for single Steiner demands


def _min_cut(g: Graph, x, s, t):
    """Min s-t cut under nonnegative edge capacities x (Edmonds-Karp).

    Returns (value, side containing s)."""
    cap = {}
    for (u, v), w in zip(g.edges, x):
        cap[(u, v)] = cap.get((u, v), 0.0) + float(w)
        cap[(v, u)] = cap.get((v, u), 0.0) + float(w)
    flow = {k: 0.0 for k in cap}
    value = 0.0
    while True:
        parent = {s: s}
        queue = [s]
        while queue and t not in parent:
            u = queue.pop(0)
            for v in g.adjacency[u]:
                if v not in parent and cap[(u, v)] - flow[(u, v)] > 1e-12:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            side = frozenset(parent)
            return value, side
        # augment
        path = [t]
        while path[-1] != s:
            path.append(parent[path[-1]])
        path.reverse()
        aug = min(cap[(u, v)] - flow[(u, v)] for u, v in zip(path, path[1:]))
        for u, v in zip(path, path[1:]):
            flow[(u, v)] += aug
            flow[(v, u)] -= aug
        value += aug


def _solve_generate(g: Graph, spec: BValueSpec):
    """Row generation for a single Steiner separation demand."""
    if not (spec.kind == "steiner" and spec.ell == 1):
        raise InstanceTooLarge(
            "generate mode is only available for single Steiner demands"
        )
    T = list(spec.data[0])
    n = g.vertex_count
    full = (1 << n) - 1
    active = []  # masks
    seen = set()
    for t in T:
        mask = 1 << t
        if t != 0:
            mask ^= full  # canonical side contains vertex 0
        if mask not in seen and 0 < mask < full:
            seen.add(mask)
            active.append(mask)
    for _ in range(200 + 4 * len(g.edges) * n):
        masks = np.array(active, dtype=np.int64)
        x, objective, _ = _solve_cover_float(g, masks, [1] * len(active))
        worst = None
        for t in T[1:]:
            value, side = _min_cut(g, x, T[0], t)
            if value < 1 - 1e-9 and (worst is None or value < worst[0]):
                worst = (value, side)
        if worst is None:
            margin = float(
                (crossing_mass(masks, *g.edge_arrays, x) - 1.0).min()
            )
            return x, objective, margin, masks
        mask = 0
        for v in worst[1]:
            mask |= 1 << v
        if not (mask & 1):
            mask ^= (1 << n) - 1
        if mask in seen:
            raise IterationLimit("separation oracle repeated a cut")
        seen.add(mask)
        active.append(mask)
    raise IterationLimit("constraint generation did not converge")


# ---------------------------------------------------------------------------
# public solve


def solve(lp: LPInstance, mode="enumerate", exact=False) -> LPSolution:
    """Optimize a cut-covering LP.

    mode="enumerate" uses the materialized constraints; mode="generate"
    runs min-cut separation (single Steiner demands only).  exact=True
    switches to rational arithmetic (|E| <= 12).
    """
    g = lp.graph
    ne = len(g.edges)
    if lp.kind == "upper":
        # separable: one single-demand lower LP per block
        total = Fraction(0) if exact else 0.0
        values = {}
        worst_margin = math.inf
        for i in range(lp.spec.ell):
            sub = _single_block_spec(lp.spec, i)
            sub_lp = build_lower_lp(g, sub) if not lp.lazy else LPInstance(
                kind="lower", graph=g, spec=sub, lazy=True
            )
            sol = solve(sub_lp, mode=mode, exact=exact)
            for e_idx in range(ne):
                values[(i, e_idx)] = sol.values[e_idx]
            total += sol.objective
            if sol.feasibility_margin is not None:
                worst_margin = min(worst_margin, sol.feasibility_margin)
        return LPSolution(
            values=values,
            objective=total,
            feasibility_margin=None if exact else worst_margin,
            solver_status="optimal",
            kind="upper",
            exact=exact,
        )
    if lp.lazy or mode == "generate":
        if exact:
            raise InstanceTooLarge("exact mode requires enumerated constraints")
        x, objective, margin, _ = _solve_generate(g, lp.spec)
        return LPSolution(x, objective, margin, "optimal", kind="lower")
    if exact:
        x, objective, _ = _solve_cover_exact(g, lp.masks, lp.rhs)
        margin = _exact_margin(g, lp.masks, lp.rhs, x)
        return LPSolution(x, objective, margin, "optimal", kind="lower", exact=True)
    x, objective, margin = _solve_cover_float(g, lp.masks, lp.rhs)
    return LPSolution(x, objective, margin, "optimal", kind="lower")


def _single_block_spec(spec: BValueSpec, i):
    if spec.kind == "steiner":
        return spec_steiner([spec.data[i]], label=f"{spec.label}[{i}]")
    if spec.kind == "mdn":
        return spec_mdn(spec.data[i], label=f"{spec.label}[{i}]")
    if spec.kind == "match":
        return spec_match([spec.data[i]], label=f"{spec.label}[{i}]")
    return BValueSpec(label=f"{spec.label}[{i}]", kind="custom", custom=(spec.custom[i],))


def _exact_margin(g: Graph, masks, rhs, x):
    if len(masks) == 0:
        return None
    eu, ev = g.edge_arrays
    worst = None
    for r, m in enumerate(masks):
        lhs = Fraction(0)
        for j in range(len(g.edges)):
            if ((int(m) >> int(eu[j])) & 1) != ((int(m) >> int(ev[j])) & 1):
                lhs += x[j]
        slack = lhs - Fraction(rhs[r])
        if worst is None or slack < worst:
            worst = slack
    return worst


# ---------------------------------------------------------------------------
# named specializations


def lp_st(g: Graph, K, exact=False, mode="enumerate"):
    """Optimum of the Steiner-separation LP for terminal set K."""
    spec = spec_steiner([K], label="lp_st")
    sol = solve(build_lower_lp(g, spec), mode=mode, exact=exact)
    return sol.objective


def lp_mdn(g: Graph, K, exact=False):
    """Optimum of the min-side-terminal-count LP for terminal set K."""
    sol = solve(build_lower_lp(g, spec_mdn(K, label="lp_mdn")), exact=exact)
    return sol.objective


def lp_mtch(g: Graph, K, M, exact=False):
    """Optimum of the matching-separation LP for pair set M (K unused
    beyond carrying the pairs' vertices)."""
    sol = solve(build_lower_lp(g, spec_match([M], label="lp_mtch")), exact=exact)
    return sol.objective


def tree_closed_form(t: Graph, spec: BValueSpec):
    """Sum over tree edges of the total demand of the edge's removal cut.

    Equals both program optima on trees for sub-additive demand families.
    """
    if not t.is_tree():
        raise NotATree("closed form requires a tree")
    n = t.vertex_count
    total = 0
    for u, v in t.edges:
        # component of u after deleting (u,v)
        seen = {u}
        stack = [u]
        while stack:
            a = stack.pop()
            for b in t.adjacency[a]:
                if a == u and b == v:
                    continue
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        mask = 0
        for w in seen:
            mask |= 1 << w
        for i in range(spec.ell):
            total += spec.mask_value(i, mask, n)
    return total


@dataclass
class RoutingSolution:
    values: dict  # (block, edge index) -> value
    cost: object
    mode: str


def upper_lp_by_routing(g: Graph, groups: GroupedTerminals, mode="steiner"):
    """A feasible point of the upper program built by explicit routing.

    steiner mode: x_{i,e} = 1 on an approximate Steiner tree of K_i.
    matching mode: add 1 along a shortest path per matched pair of M_i.
    """
    values = {}
    cost = 0
    if mode == "matching":
        if groups.matchings is None:
            raise MissingMatchings("matching mode needs per-group matchings")
        for i, pairs in enumerate(groups.matchings):
            for u, v in pairs:
                path = g.shortest_path(u, v)
                for a, b in zip(path, path[1:]):
                    e = g.edge_index[(a, b) if a < b else (b, a)]
                    values[(i, e)] = values.get((i, e), 0) + 1
                    cost += 1
    elif mode == "steiner":
        for i, grp in enumerate(groups.groups):
            tree = steiner_tree_approx(g, set(grp))
            for e in tree.edges:
                values[(i, g.edge_index[e])] = 1
                cost += 1
    else:
        raise ValueError(f"unknown routing mode {mode!r}")
    return RoutingSolution(values=values, cost=cost, mode=mode)


def routing_feasible(g: Graph, groups: GroupedTerminals, routing: RoutingSolution):
    """Exhaustive feasibility scan of a routing against its induced spec."""
    if routing.mode == "matching":
        spec = spec_match(groups.matchings)
    else:
        spec = spec_steiner([set(grp) for grp in groups.groups])
    n = g.vertex_count
    ne = len(g.edges)
    for m in enumerate_cut_masks(n):
        for i in range(spec.ell):
            need = spec.mask_value(i, int(m), n)
            if need == 0:
                continue
            have = 0
            for e in range(ne):
                u, v = g.edges[e]
                if ((int(m) >> u) & 1) != ((int(m) >> v) & 1):
                    have += routing.values.get((i, e), 0)
            if have < need:
                return False
    return True


@dataclass
class GapReport:
    lower: float
    upper: float
    ratio: float
    infinite: bool = False


def gap_report(g: Graph, spec: BValueSpec) -> GapReport:
    """Objectives of both programs and their measured ratio."""
    lo = float(solve(build_lower_lp(g, spec)).objective)
    up = float(solve(build_upper_lp(g, spec)).objective)
    if lo <= FLOAT_TOL:
        if up <= FLOAT_TOL:
            return GapReport(lower=lo, upper=up, ratio=1.0)
        return GapReport(lower=lo, upper=up, ratio=math.inf, infinite=True)
    return GapReport(lower=lo, upper=up, ratio=up / lo)


# ---------------------------------------------------------------------------
# text export


def dump_lp_text(lp: LPInstance):
    """Human-readable LP text (objective then one constraint per row)."""
    g = lp.graph

    def var(i, e):
        u, v = g.edges[e]
        return f"x_{u}_{v}" if lp.kind == "lower" else f"x{i}_{u}_{v}"

    lines = []
    if lp.kind == "lower":
        terms = [var(-1, e) for e in range(len(g.edges))]
    else:
        terms = [
            var(i, e) for i in range(lp.spec.ell) for e in range(len(g.edges))
        ]
    lines.append("min " + " + ".join(terms))
    lines.append("subject to")
    if lp.masks is None:
        lines.append("  (constraints generated on demand)")
        return "\n".join(lines)
    for r, m in enumerate(lp.masks):
        side = [v for v in range(g.vertex_count) if (int(m) >> v) & 1]
        cross = [
            e
            for e, (u, v) in enumerate(g.edges)
            if ((int(m) >> u) & 1) != ((int(m) >> v) & 1)
        ]
        blk = -1 if lp.blocks is None else int(lp.blocks[r])
        lhs = " + ".join(var(blk, e) for e in cross)
        lines.append(f"  {lhs} >= {lp.rhs[r]}   ; cut {side}")
    lines.append("  all variables >= 0")
    return "\n".join(lines)
