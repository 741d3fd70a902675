"""Seeded samplers for the structured hard input distributions.

Every sampler is a pure function of (parameters, seed); structural
promises (no common ones, within-set equality, distinct prefixes) hold on
every sample by construction.
"""

from __future__ import annotations

import math

import numpy as np

from .cuts import Multicut
from .errors import AlphabetTooSmall, MissingMatchings
from .graph import GroupedTerminals
from .protocols import InputAssignment


def _rand_bits(rng, n):
    if n == 0:
        return 0
    bits = rng.integers(0, 2, size=n)
    val = 0
    for i, b in enumerate(bits):
        val |= int(b) << i
    return val


def dist_uniform_iid(groups: GroupedTerminals, n, seed=0) -> InputAssignment:
    """Every slot independent uniform over {0,1}^n."""
    rng = np.random.default_rng(seed)
    bits = {slot: _rand_bits(rng, n) for slot in groups.slots}
    return InputAssignment(n=n, bits=bits)


def dist_distinct(groups: GroupedTerminals, n, seed=0) -> InputAssignment:
    """All slots pairwise distinct, uniform over distinct tuples
    (sequential rejection)."""
    k = len(groups.slots)
    if 2 ** n < k:
        raise AlphabetTooSmall(f"need 2^n >= {k} slots, have n={n}")
    rng = np.random.default_rng(seed)
    chosen = []
    used = set()
    while len(chosen) < k:
        v = _rand_bits(rng, n)
        if v in used:
            continue
        used.add(v)
        chosen.append(v)
    bits = {slot: chosen[i] for i, slot in enumerate(groups.slots)}
    return InputAssignment(n=n, bits=bits)


def dist_udisj(m, seed=0):
    """Two-party unique-disjointness marginal: per coordinate a fair coin
    zeroes one side and leaves the other uniform, so no coordinate is ever
    common to both strings."""
    rng = np.random.default_rng(seed)
    u = 0
    v = 0
    for i in range(m):
        d = rng.integers(0, 2)
        bit = int(rng.integers(0, 2))
        if d == 0:
            v |= bit << i
        else:
            u |= bit << i
    return u, v


def prefix_bits_for(pair_count):
    """Matched-pair prefix width: one bit beyond the packing minimum."""
    if pair_count <= 1:
        return 1
    return math.ceil(math.log2(pair_count)) + 1


def dist_xor_ed(groups: GroupedTerminals, n, seed=0) -> InputAssignment:
    """Matched-pair inputs: each pair shares a globally distinct prefix;
    suffixes follow the coin rule over three fixed distinct strings, so a
    pair never holds (s1, s1) and cross-pair strings never collide."""
    if groups.matchings is None:
        raise MissingMatchings("distribution needs matchings on every group")
    pairs = [(i, p) for i, pm in enumerate(groups.matchings) for p in pm]
    m = len(pairs)
    if m == 0:
        raise MissingMatchings("no matched pairs to sample for")
    p_bits = prefix_bits_for(m)
    n_suffix = n - p_bits
    if n_suffix < 2:
        raise AlphabetTooSmall(
            f"need n >= prefix({p_bits}) + 2 for three distinct suffixes, have n={n}"
        )
    s_x0 = 0
    s_y0 = 1
    s_one = (1 << n_suffix) - 1
    rng = np.random.default_rng(seed)
    values = {}
    for j, (gi, (u_vtx, v_vtx)) in enumerate(pairs):
        prefix = j  # distinct prefixes across all pairs
        d = rng.integers(0, 2)
        if d == 0:
            xs = s_x0
            ys = s_one if rng.integers(0, 2) else s_y0
        else:
            ys = s_y0
            xs = s_one if rng.integers(0, 2) else s_x0
        values[(gi, u_vtx)] = (xs << p_bits) | prefix
        values[(gi, v_vtx)] = (ys << p_bits) | prefix
    bits = {}
    for slot in groups.slots:
        gi, pos = slot
        vtx = groups.groups[gi][pos]
        if (gi, vtx) not in values:
            raise MissingMatchings(
                f"group {gi} vertex {vtx} is unmatched; the matched-pair "
                "distribution needs a perfect matching per group"
            )
        bits[slot] = values[(gi, vtx)]
    return InputAssignment(n=n, bits=bits)


def dist_ed_xor_two_party(t, n, seed=0):
    """Two lists of t independent uniform strings."""
    rng = np.random.default_rng(seed)
    a = [_rand_bits(rng, n) for _ in range(t)]
    b = [_rand_bits(rng, n) for _ in range(t)]
    return a, b


def star_promise_sample(s, n, rng):
    """Stand-in for the star hard distribution: per coordinate a uniform
    owner may hold a 1, everyone else holds 0.  This is NOT the
    literature's distribution; only its unique-intersection promise
    structure is relied upon."""
    xs = [0] * s
    for i in range(n):
        owner = int(rng.integers(0, s))
        if rng.integers(0, 2):
            xs[owner] |= 1 << i
    return xs


def dist_disj_multicut(c: Multicut, groups: GroupedTerminals, n, seed=0) -> InputAssignment:
    """Disjointness inputs shaped by a multicut over the terminals: all
    terminals inside one explicit set share a promise-structured string;
    implicit-set terminals hold the all-ones vector."""
    rng = np.random.default_rng(seed)
    xs = star_promise_sample(c.size, n, rng)
    ones = (1 << n) - 1 if n > 0 else 0
    bits = {}
    for slot in groups.slots:
        vtx = groups.slot_vertex(slot)
        part = c.part_of(vtx)
        bits[slot] = ones if part < 0 else xs[part]
    return InputAssignment(n=n, bits=bits)
