"""Round-based message-passing simulation with exact per-edge bit counts.

Every protocol here is oblivious: it schedules exactly which edges speak,
in which direction, with statically known field widths, so bit accounting
is pure arithmetic and "expected silence" never arises.  Public
randomness is one seeded stream visible to every node.

Input strings are n-bit integers; hashing is by random parities (inner
products with public random strings), so one parity bit misses an
inequality with probability exactly 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._accel import crossing_mass
from .cuts import BValueSpec, Cut, crossing_edges, enumerate_cut_masks
from .errors import MissingMatchings, ShapeMismatch
from .graph import (
    Graph,
    GroupedTerminals,
    grouped_median_and_representatives,
    sigma,
    steiner_tree_approx,
)


@dataclass(frozen=True)
class InputAssignment:
    """One n-bit string per terminal slot (group index, position)."""

    n: int
    bits: dict

    def __post_init__(self):
        for slot, v in self.bits.items():
            if not (0 <= v < (1 << self.n) if self.n else v == 0):
                raise ValueError(f"slot {slot} value {v} not an {self.n}-bit string")

    def check_shape(self, groups: GroupedTerminals):
        if set(self.bits) != set(groups.slots):
            raise ShapeMismatch("input slots do not match the terminal groups")
        return self

    def to_json(self):
        return {
            "n": self.n,
            "slots": [
                {"group": g, "pos": p, "value": format(v, f"0{max(self.n,1)}b")}
                for (g, p), v in sorted(self.bits.items())
            ],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            n=obj["n"],
            bits={
                (s["group"], s["pos"]): int(s["value"], 2) if s["value"] else 0
                for s in obj["slots"]
            },
        )


@dataclass
class ProtocolTrace:
    """Per-edge per-direction bit counts plus the run's outcome."""

    counts: dict  # (u, v) directed -> bits
    total: int
    output: int
    output_vertex: int
    rounds: int
    seed: int
    protocol: str
    params: dict
    aux: dict = field(default_factory=dict)

    def undirected_vector(self, g: Graph):
        vec = np.zeros(len(g.edges), dtype=np.float64)
        for (u, v), bits in self.counts.items():
            vec[g.edge_index[(u, v) if u < v else (v, u)]] += bits
        return vec

    def to_json(self, g: Graph):
        return {
            "edges": [
                {
                    "u": u,
                    "v": v,
                    "bits_uv": self.counts.get((u, v), 0),
                    "bits_vu": self.counts.get((v, u), 0),
                }
                for u, v in g.edges
            ],
            "total": self.total,
            "output": self.output,
            "output_vertex": self.output_vertex,
            "rounds": self.rounds,
            "seed": self.seed,
            "protocol": self.protocol,
            "params": self.params,
        }


@dataclass(frozen=True)
class Protocol:
    kind: str
    params: tuple = ()  # sorted (key, value) pairs

    @property
    def param_dict(self):
        return dict(self.params)

    def requires_matchings(self):
        return self.kind == "xor_ip"


def protocol_xor_aggregate(n):
    return Protocol("xor_aggregate", (("n", n),))


def protocol_equality_hash(hash_bits=2):
    return Protocol("equality_hash", (("hash_bits", hash_bits),))


def protocol_ed_median(hash_bits=None):
    return Protocol("ed_median", (("hash_bits", hash_bits),))


def protocol_disj_and(n):
    return Protocol("disj_and", (("n", n),))


def protocol_ed_xor(hash_bits=None):
    return Protocol("ed_xor", (("hash_bits", hash_bits),))


def protocol_xor_ed(hash_bits=None):
    return Protocol("xor_ed", (("hash_bits", hash_bits),))


def protocol_xor_ip(n):
    return Protocol("xor_ip", (("n", n),))


PROTOCOL_FACTORIES = {
    "xor_aggregate": protocol_xor_aggregate,
    "equality_hash": protocol_equality_hash,
    "ed_median": protocol_ed_median,
    "disj_and": protocol_disj_and,
    "ed_xor": protocol_ed_xor,
    "xor_ed": protocol_xor_ed,
    "xor_ip": protocol_xor_ip,
}


def default_hash_bits(k):
    """c * ceil(log2 k) fingerprint width with c = 4."""
    return 4 * max(1, math.ceil(math.log2(max(k, 2))))


# ---------------------------------------------------------------------------
# simulation helpers


class _Sim:
    def __init__(self, g, seed):
        self.g = g
        self.counts = {}
        self.rounds = 0
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def send(self, u, v, nbits):
        if nbits:
            self.counts[(u, v)] = self.counts.get((u, v), 0) + nbits

    def send_along(self, path, nbits):
        for a, b in zip(path, path[1:]):
            self.send(a, b, nbits)

    def parities(self, hash_bits, n):
        rs = []
        for _ in range(hash_bits):
            r = 0
            if n:
                for i, b in enumerate(self.rng.integers(0, 2, size=n)):
                    r |= int(b) << i
            rs.append(r)
        return rs

    def total(self):
        return sum(self.counts.values())


def _hash_value(parities, x):
    h = 0
    for i, r in enumerate(parities):
        h |= (bin(x & r).count("1") & 1) << i
    return h


@lru_cache(maxsize=4096)
def _rooted_tree(tree_edges, root):
    """(parent map, bottom-up vertex order, height) of a rooted edge list."""
    adj = {}
    for u, v in tree_edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    if root not in adj and tree_edges:
        raise ValueError("root not in tree")
    parent = {root: None}
    order = [root]
    depth = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for u in sorted(frontier):
            for v in sorted(adj.get(u, ())):
                if v not in parent:
                    parent[v] = u
                    depth[v] = depth[u] + 1
                    order.append(v)
                    nxt.append(v)
        frontier = nxt
    order.reverse()  # leaves first
    height = max(depth.values()) if depth else 0
    return parent, tuple(order), height


@lru_cache(maxsize=4096)
def _group_tree(g: Graph, terminals):
    return steiner_tree_approx(g, set(terminals))


def _fold_xor(sim, g, terminals, contributions, nbits):
    """XOR-fold values up an approximate Steiner tree; returns
    (root, folded value, tree edges).  contributions: vertex -> list of values."""
    tree = _group_tree(g, tuple(sorted(set(terminals))))
    root = min(set(terminals))
    parent, order, height = _rooted_tree(tree.edges, root)
    acc = {v: 0 for v in parent}
    for v, vals in contributions.items():
        for x in vals:
            acc[v] ^= x
    for v in order:
        if parent[v] is not None:
            sim.send(v, parent[v], nbits)
            acc[parent[v]] ^= acc[v]
    sim.rounds += height
    return root, acc[root], tree.edges


# ---------------------------------------------------------------------------
# protocol runners


def _slots_by_vertex(groups, gi):
    out = {}
    for j, vtx in enumerate(groups.groups[gi]):
        out.setdefault(vtx, []).append((gi, j))
    return out


def _run_xor_aggregate(sim, g, groups, inputs, params):
    n = params["n"]
    if groups.group_count != 1:
        raise ShapeMismatch("xor_aggregate runs over a single group")
    by_vertex = _slots_by_vertex(groups, 0)
    contrib = {v: [inputs.bits[s] for s in slots] for v, slots in by_vertex.items()}
    root, value, _ = _fold_xor(sim, g, groups.groups[0], contrib, n)
    return value, root, {}


def _run_disj_and(sim, g, groups, inputs, params):
    n = params["n"]
    if groups.group_count != 1:
        raise ShapeMismatch("disj_and runs over a single group")
    tree = _group_tree(g, tuple(sorted(set(groups.groups[0]))))
    root = min(set(groups.groups[0]))
    parent, order, height = _rooted_tree(tree.edges, root)
    ones = (1 << n) - 1 if n else 0
    acc = {v: ones for v in parent}
    for v, slots in _slots_by_vertex(groups, 0).items():
        for s in slots:
            acc[v] &= inputs.bits[s]
    for v in order:
        if parent[v] is not None:
            sim.send(v, parent[v], n)
            acc[parent[v]] &= acc[v]
    sim.rounds += height
    intersection = acc[root]
    disjoint = 1 if intersection == 0 else 0
    return disjoint, root, {
        "intersection": intersection,
        "intersection_nonempty": 1 - disjoint,
    }


def _run_equality_hash(sim, g, groups, inputs, params):
    hash_bits = params["hash_bits"]
    if groups.group_count != 1:
        raise ShapeMismatch("equality_hash runs over a single group")
    n = inputs.n
    parities = sim.parities(hash_bits, n)
    tree = _group_tree(g, tuple(sorted(set(groups.groups[0]))))
    root = min(set(groups.groups[0]))
    parent, order, height = _rooted_tree(tree.edges, root)
    by_vertex = _slots_by_vertex(groups, 0)

    # message = (hash, candidate); inequality is signaled in-band by a
    # hash inconsistent with the candidate, keeping every message at
    # hash_bits + n bits
    state = {}  # vertex -> (ok, hash, candidate)
    for v in order:
        own = [inputs.bits[s] for s in by_vertex.get(v, ())]
        hashes = [_hash_value(parities, x) for x in own]
        cand = own[0] if own else None
        ok = True
        for u in sorted(c for c, p in parent.items() if p == v):
            c_ok, c_hash, c_cand = state[u]
            if not c_ok:
                ok = False
            hashes.append(c_hash)
            if cand is None:
                cand = c_cand
        if any(h != hashes[0] for h in hashes):
            ok = False
        h = hashes[0] if hashes else 0
        if parent[v] is not None:
            if not ok:
                h = _hash_value(parities, cand if cand is not None else 0) ^ 1
            sim.send(v, parent[v], hash_bits + n)
        state[v] = (ok, h, cand if cand is not None else 0)
    sim.rounds += height
    equal = 1 if state[root][0] else 0
    return equal, root, {}


def _run_ed_median(sim, g, groups, inputs, params):
    if groups.group_count != 1:
        raise ShapeMismatch("ed_median runs over a single group")
    group = groups.groups[0]
    hash_bits = params["hash_bits"] or default_hash_bits(len(group))
    parities = sim.parities(hash_bits, inputs.n)
    _, median = sigma(g, group)
    fingerprints = []
    longest = 0
    for j, vtx in enumerate(group):
        fp = _hash_value(parities, inputs.bits[(0, j)])
        fingerprints.append(fp)
        if vtx != median:
            path = g.shortest_path(vtx, median)
            sim.send_along(path, hash_bits)
            longest = max(longest, len(path) - 1)
    sim.rounds += longest
    distinct = 1 if len(set(fingerprints)) == len(fingerprints) else 0
    return distinct, median, {"hash_bits": hash_bits}


def _run_ed_xor(sim, g, groups, inputs, params):
    k = len(groups.slots)
    hash_bits = params["hash_bits"] or default_hash_bits(k)
    parities = sim.parities(hash_bits, inputs.n)
    stage1 = 0
    group_hashes = []
    for gi in range(groups.group_count):
        by_vertex = _slots_by_vertex(groups, gi)
        contrib = {
            v: [_hash_value(parities, inputs.bits[s]) for s in slots]
            for v, slots in by_vertex.items()
        }
        before = sim.total()
        root, h, tree_edges = _fold_xor(sim, g, groups.groups[gi], contrib, hash_bits)
        # broadcast back down so every group member knows the hash
        parent, order, height = _rooted_tree(tree_edges, root)
        for v in reversed(order):
            if parent[v] is not None:
                sim.send(parent[v], v, hash_bits)
        sim.rounds += height
        group_hashes.append(h)
        stage1 += sim.total() - before
    median, reps = grouped_median_and_representatives(g, groups)
    before = sim.total()
    longest = 0
    for gi, rep in enumerate(reps):
        if rep != median:
            path = g.shortest_path(rep, median)
            sim.send_along(path, hash_bits)
            longest = max(longest, len(path) - 1)
    sim.rounds += longest
    stage2 = sim.total() - before
    distinct = 1 if len(set(group_hashes)) == len(group_hashes) else 0
    return distinct, median, {
        "hash_bits": hash_bits,
        "stage_group_hashing": stage1,
        "stage_median_gather": stage2,
    }


def _run_xor_ed(sim, g, groups, inputs, params):
    k = len(groups.slots)
    hash_bits = params["hash_bits"] or default_hash_bits(k)
    parities = sim.parities(hash_bits, inputs.n)
    stage1 = 0
    medians = []
    ed_bits = {}
    longest = 0
    for gi in range(groups.group_count):
        group = groups.groups[gi]
        _, med = sigma(g, group)
        fingerprints = []
        for j, vtx in enumerate(group):
            fp = _hash_value(parities, inputs.bits[(gi, j)])
            fingerprints.append(fp)
            if vtx != med:
                path = g.shortest_path(vtx, med)
                sim.send_along(path, hash_bits)
                stage1 += hash_bits * (len(path) - 1)
                longest = max(longest, len(path) - 1)
        bit = 1 if len(set(fingerprints)) == len(fingerprints) else 0
        medians.append(med)
        ed_bits.setdefault(med, []).append(bit)
    sim.rounds += longest
    before = sim.total()
    root, value, _ = _fold_xor(sim, g, medians, ed_bits, 1)
    stage2 = sim.total() - before
    return value, root, {
        "hash_bits": hash_bits,
        "stage_group_ed": stage1,
        "stage_xor_fold": stage2,
        "medians": tuple(medians),
    }


def _run_xor_ip(sim, g, groups, inputs, params):
    n = params["n"]
    if groups.matchings is None:
        raise MissingMatchings("xor_ip needs a matching for every group")
    for gi, pairs in enumerate(groups.matchings):
        if not pairs:
            raise MissingMatchings(f"group {gi} has no matched pairs")
        if len(set(groups.groups[gi])) != len(groups.groups[gi]):
            raise ShapeMismatch("xor_ip groups must not repeat vertices")
    value_at = {
        (gi, vtx): inputs.bits[(gi, j)]
        for gi in range(groups.group_count)
        for j, vtx in enumerate(groups.groups[gi])
    }
    pair_bits = 0
    agg_bits = 0
    heads_parity = {}
    group_heads = []
    longest = 0
    for gi, pairs in enumerate(groups.matchings):
        pair_values = {}
        for u, v in pairs:
            path = g.shortest_path(v, u)
            sim.send_along(path, n)
            pair_bits += n * (len(path) - 1)
            longest = max(longest, len(path) - 1)
            pair_values.setdefault(u, []).append(
                value_at[(gi, u)] & value_at[(gi, v)]
            )
        heads = sorted(pair_values)
        before = sim.total()
        root, vec, _ = _fold_xor(sim, g, heads, pair_values, n)
        agg_bits += sim.total() - before
        parity = bin(vec).count("1") & 1
        heads_parity.setdefault(root, []).append(parity)
        group_heads.append(root)
    sim.rounds += longest
    before = sim.total()
    root, out, _ = _fold_xor(sim, g, group_heads, heads_parity, 1)
    rep_bits = sim.total() - before
    return out, root, {
        "stage_pair_exchange": pair_bits,
        "stage_group_fold": agg_bits,
        "stage_rep_fold": rep_bits,
        "heads": tuple(group_heads),
    }


_RUNNERS = {
    "xor_aggregate": _run_xor_aggregate,
    "equality_hash": _run_equality_hash,
    "ed_median": _run_ed_median,
    "disj_and": _run_disj_and,
    "ed_xor": _run_ed_xor,
    "xor_ed": _run_xor_ed,
    "xor_ip": _run_xor_ip,
}


def run(g: Graph, groups: GroupedTerminals, protocol: Protocol, inputs: InputAssignment, seed=0):
    """Simulate one protocol execution; deterministic given the seed."""
    groups.validate_for(g)
    inputs.check_shape(groups)
    if protocol.requires_matchings() and groups.matchings is None:
        raise MissingMatchings(f"{protocol.kind} needs per-group matchings")
    params = protocol.param_dict
    if "n" in params and params["n"] != inputs.n:
        raise ShapeMismatch(
            f"protocol expects n={params['n']}, inputs carry n={inputs.n}"
        )
    sim = _Sim(g, seed)
    output, out_vertex, aux = _RUNNERS[protocol.kind](sim, g, groups, inputs, params)
    return ProtocolTrace(
        counts=sim.counts,
        total=sim.total(),
        output=output,
        output_vertex=out_vertex,
        rounds=sim.rounds,
        seed=seed,
        protocol=protocol.kind,
        params=params,
        aux=aux,
    )


# ---------------------------------------------------------------------------
# reference evaluation (direct computation of the target functions)


def evaluate_function(protocol: Protocol, groups: GroupedTerminals, inputs: InputAssignment):
    """Ground-truth value of the function the protocol computes."""
    kind = protocol.kind
    n = inputs.n
    group_values = [
        [inputs.bits[(gi, j)] for j in range(len(grp))]
        for gi, grp in enumerate(groups.groups)
    ]
    if kind == "xor_aggregate":
        out = 0
        for v in group_values[0]:
            out ^= v
        return out
    if kind == "equality_hash":
        return 1 if len(set(group_values[0])) <= 1 else 0
    if kind == "ed_median":
        return 1 if len(set(group_values[0])) == len(group_values[0]) else 0
    if kind == "disj_and":
        ones = (1 << n) - 1 if n else 0
        acc = ones
        for v in group_values[0]:
            acc &= v
        return 1 if acc == 0 else 0
    if kind == "ed_xor":
        xors = []
        for vals in group_values:
            x = 0
            for v in vals:
                x ^= v
            xors.append(x)
        return 1 if len(set(xors)) == len(xors) else 0
    if kind == "xor_ed":
        out = 0
        for vals in group_values:
            out ^= 1 if len(set(vals)) == len(vals) else 0
        return out
    if kind == "xor_ip":
        out = 0
        for gi, pairs in enumerate(groups.matchings):
            at = {
                vtx: inputs.bits[(gi, j)]
                for j, vtx in enumerate(groups.groups[gi])
            }
            vec = 0
            for u, v in pairs:
                vec ^= at[u] & at[v]
            out ^= bin(vec).count("1") & 1
        return out
    raise ValueError(f"unknown protocol kind {kind!r}")


def formula_bound(protocol: Protocol, g: Graph, groups: GroupedTerminals, n):
    """Worst-case total-bits bound for a protocol from its cost formula,
    with this implementation's own constants."""
    kind = protocol.kind
    params = protocol.param_dict
    hb = params.get("hash_bits") or default_hash_bits(len(groups.slots))

    def tree_edges(terminals):
        terminals = set(terminals)
        if len(terminals) < 2:
            return 0
        return len(steiner_tree_approx(g, terminals).edges)

    if kind in ("xor_aggregate", "disj_and"):
        return params["n"] * tree_edges(groups.groups[0])
    if kind == "equality_hash":
        return (params["hash_bits"] + n) * tree_edges(groups.groups[0])
    if kind == "ed_median":
        return hb * sigma(g, list(groups.groups[0]))[0]
    if kind == "ed_xor":
        trees = sum(tree_edges(grp) for grp in groups.groups)
        return hb * (sigma_grouped(g, groups) + 2 * trees)
    if kind == "xor_ed":
        sig_sum = sum(sigma(g, list(grp))[0] for grp in groups.groups)
        meds = {sigma(g, list(grp))[1] for grp in groups.groups}
        return hb * sig_sum + tree_edges(meds)
    if kind == "xor_ip":
        dm = g.distances
        pair_d = sum(
            int(dm[u, v]) for pairs in (groups.matchings or ()) for u, v in pairs
        )
        agg = sum(
            tree_edges({u for u, _v in pairs}) for pairs in (groups.matchings or ())
        )
        heads = {min(u for u, _v in pairs) for pairs in (groups.matchings or ()) if pairs}
        return params["n"] * (pair_d + agg) + tree_edges(heads)
    raise ValueError(f"unknown protocol kind {kind!r}")


# ---------------------------------------------------------------------------
# cut projections and measured feasibility


def cut_projection(trace: ProtocolTrace, g: Graph, c: Cut):
    """Bits the run sent across the cut, both directions."""
    total = 0
    for u, v in crossing_edges(g, c):
        total += trace.counts.get((u, v), 0) + trace.counts.get((v, u), 0)
    return total


@dataclass
class FeasibilityReport:
    mean_vector: np.ndarray
    scale: float
    runs: int
    violations: list
    checked_cuts: int

    @property
    def feasible(self):
        return not self.violations


def measured_vector_feasibility(
    g: Graph,
    groups: GroupedTerminals,
    protocol: Protocol,
    distribution,
    runs,
    spec: BValueSpec,
    scale,
    seed=0,
) -> FeasibilityReport:
    """Check the scaled empirical per-edge communication vector against
    every cut constraint of the demand family; slack below 3 standard
    errors is reported as a violation."""
    ne = len(g.edges)
    samples = np.zeros((runs, ne))
    for r in range(runs):
        inputs = distribution(seed + r)
        trace = run(g, groups, protocol, inputs, seed=seed + r)
        samples[r] = trace.undirected_vector(g)
    mean = samples.mean(axis=0) / scale
    n = g.vertex_count
    masks = enumerate_cut_masks(n)
    eu, ev = g.edge_arrays
    lhs = crossing_mass(masks, eu, ev, mean)
    if runs > 1:
        per_run = np.stack(
            [crossing_mass(masks, eu, ev, samples[r] / scale) for r in range(runs)]
        )
        se = per_run.std(axis=0, ddof=1) / math.sqrt(runs)
    else:
        se = np.zeros(len(masks))
    violations = []
    checked = 0
    for idx, m in enumerate(masks):
        rhs = sum(spec.mask_value(i, int(m), n) for i in range(spec.ell))
        if rhs == 0:
            continue
        checked += 1
        if lhs[idx] < rhs - 3 * se[idx]:
            side = [v for v in range(n) if (int(m) >> v) & 1]
            violations.append(
                {"side": side, "lhs": float(lhs[idx]), "rhs": float(rhs), "se": float(se[idx])}
            )
    return FeasibilityReport(
        mean_vector=mean, scale=scale, runs=runs, violations=violations, checked_cuts=checked
    )
