"""Acceptance battery: one test per criterion, at its stated scale and
tolerance, printing a pass/fail line with the elapsed time."""

import math
import time
from fractions import Fraction

import numpy as np

from topocomm.cuts import (
    bourgain_cut_collection,
    check_subadditive,
    enumerate_cut_masks,
    spec_custom,
    spec_match,
    spec_steiner,
    verify_separation,
)
from topocomm.distributions import dist_uniform_iid
from topocomm.embedding import STRATEGIES, max_stretch_exact, sample_subtree, transfer_solution
from topocomm.graph import (
    Graph,
    GroupedTerminals,
    cycle_graph,
    grid_graph,
    matching_distance,
    path_graph,
    random_connected_graph,
    random_tree,
    sigma,
    sigma_grouped,
    star_graph,
    steiner_tree_approx,
    steiner_tree_exact,
)
from topocomm.lp import (
    build_lower_lp,
    build_upper_lp,
    lp_mdn,
    lp_st,
    solve,
    tree_closed_form,
)
from topocomm.multicut import (
    boruvka_threshold_partition,
    build_partition_sequence,
    chunk_into_family,
    ell_bound,
    family_cost_check,
    refines,
    verify_family,
)
from topocomm.protocols import (
    InputAssignment,
    evaluate_function,
    measured_vector_feasibility,
    protocol_disj_and,
    protocol_ed_median,
    protocol_ed_xor,
    protocol_equality_hash,
    protocol_xor_aggregate,
    protocol_xor_ed,
    protocol_xor_ip,
    run,
)

from oracles import exact_collision_probability, pairwise_diffs

TOL = 1e-6
TRIANGLE = Graph(3, ((0, 1), (1, 2), (0, 2)))

FIXTURES = [
    ("path4", path_graph(4), [0, 3]),
    ("star5", star_graph(4), [1, 2, 3, 4]),
    ("triangle", TRIANGLE, [0, 1, 2]),
    ("cycle6", cycle_graph(6), [0, 2, 4]),
    ("grid9", grid_graph(3, 3), [0, 2, 6, 8]),
]


class Criterion:
    def __init__(self, number, name, budget_s):
        self.number = number
        self.name = name
        self.budget_s = budget_s
        self.t0 = time.perf_counter()

    def finish(self, failures):
        elapsed = time.perf_counter() - self.t0
        status = "PASS" if not failures else "FAIL"
        print(
            f"[{status}] criterion {self.number} ({self.name}): "
            f"{elapsed:.1f}s of {self.budget_s}s budget"
        )
        assert not failures, failures
        assert elapsed < self.budget_s, f"criterion {self.number} overran its budget"


def _random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 11))
    g = random_connected_graph(n, seed=int(rng.integers(0, 2 ** 31)))
    k = int(rng.integers(2, min(n, 6) + 1))
    K = sorted(int(v) for v in rng.choice(n, size=k, replace=False))
    return g, K


def test_criterion_1_steiner_lp_sandwich():
    crit = Criterion(1, "Steiner LP sandwich", 30)
    failures = []
    for i in range(50):
        g, K = _random_instance(1000 + i)
        lp = float(lp_st(g, K))
        st_cost = steiner_tree_exact(g, K).cost
        if not (lp <= st_cost + TOL and st_cost <= 2 * lp + TOL):
            failures.append((i, lp, st_cost))
    if lp_st(TRIANGLE, [0, 1, 2], exact=True) != Fraction(3, 2):
        failures.append("triangle rational lp")
    if steiner_tree_exact(TRIANGLE, [0, 1, 2]).cost != 2:
        failures.append("triangle exact steiner")
    crit.finish(failures)


def test_criterion_2_lp_ordering_and_tree_equality():
    crit = Criterion(2, "LP ordering and tree equality", 60)
    failures = []
    for i in range(50):
        g, K = _random_instance(2000 + i)
        rng = np.random.default_rng(3000 + i)
        t = int(rng.integers(1, 4))
        sets = [
            sorted(
                int(v)
                for v in rng.choice(
                    g.vertex_count,
                    size=int(rng.integers(2, min(4, g.vertex_count) + 1)),
                    replace=False,
                )
            )
            for _ in range(t)
        ]
        st_spec = spec_steiner(sets)
        lo = solve(build_lower_lp(g, st_spec)).objective
        up = solve(build_upper_lp(g, st_spec)).objective
        if lo > up + TOL:
            failures.append(("steiner", i, lo, up))
        matchings = [
            [(s[2 * j], s[2 * j + 1]) for j in range(len(s) // 2)] for s in sets
        ]
        matchings = [m for m in matchings if m]
        if matchings:
            m_spec = spec_match(matchings)
            lo = solve(build_lower_lp(g, m_spec)).objective
            up = solve(build_upper_lp(g, m_spec)).objective
            if lo > up + TOL:
                failures.append(("match", i, lo, up))
    for i in range(20):
        rng = np.random.default_rng(4000 + i)
        n = int(rng.integers(4, 11))
        tree = random_tree(n, seed=int(rng.integers(0, 2 ** 31)))
        t = int(rng.integers(1, 4))
        sets = [
            sorted(
                int(v)
                for v in rng.choice(n, size=int(rng.integers(2, 4)), replace=False)
            )
            for _ in range(t)
        ]
        spec = spec_steiner(sets)
        lo = solve(build_lower_lp(tree, spec)).objective
        up = solve(build_upper_lp(tree, spec)).objective
        cf = tree_closed_form(tree, spec)
        if abs(lo - up) > TOL or abs(lo - cf) > TOL:
            failures.append(("tree", i, lo, up, cf))
    crit.finish(failures)


def test_criterion_3_embedding_transfer():
    crit = Criterion(3, "embedding transfer", 60)
    failures = []
    for i in range(20):
        g, K = _random_instance(5000 + i)
        spec = spec_steiner([K])
        sol = solve(build_lower_lp(g, spec))
        x = [Fraction(max(float(v), 0.0)) for v in sol.values]
        cost_x = sum(x, Fraction(0))
        lp_g = float(sol.objective)
        for j, strategy in enumerate(STRATEGIES):
            t = sample_subtree(g, strategy=strategy, seed=6000 + i * 3 + j)
            xp = transfer_solution(g, t, x)
            cost_xp = sum(xp, Fraction(0))
            ms = max_stretch_exact(g, t)
            # exact cost bound in rational arithmetic
            if cost_xp > ms * cost_x:
                failures.append(("cost-bound", i, strategy))
            # feasibility of the transferred point for the tree program
            dt_edges = list(t.edges)
            for m in enumerate_cut_masks(g.vertex_count):
                rhs = spec.mask_value(0, int(m), g.vertex_count)
                if rhs == 0:
                    continue
                lhs = sum(
                    (
                        xp[e]
                        for e, (u, v) in enumerate(dt_edges)
                        if ((int(m) >> u) & 1) != ((int(m) >> v) & 1)
                    ),
                    Fraction(0),
                )
                if float(lhs - rhs) < -TOL:
                    failures.append(("infeasible", i, strategy, int(m)))
                    break
            lp_t = float(solve(build_lower_lp(t, spec)).objective)
            if lp_g > TOL and lp_t / lp_g > float(ms) + TOL:
                failures.append(("ratio", i, strategy, lp_t, lp_g, float(ms)))
    crit.finish(failures)


def test_criterion_4_multicut_family():
    crit = Criterion(4, "multicut family", 30)
    failures = []
    cases = [(name, g, K) for name, g, K in FIXTURES]
    for i in range(20):
        g, K = _random_instance(7000 + i)
        cases.append((f"random[{i}]", g, K))
    for name, g, K in cases:
        k = len(set(K))
        if k < 2:
            continue
        fam = chunk_into_family(g, K)
        rep = verify_family(g, fam, alpha=Fraction(1, 3))
        if not rep.ok:
            failures.append((name, "properties", rep))
        cost = family_cost_check(g, K)
        if 2 * cost.sum_sizes < cost.mst_closure_cost:
            failures.append((name, "cost", cost))
        if fam.ell > ell_bound(k):
            failures.append((name, "ell", fam.ell))
        if k <= 8:
            seq = build_partition_sequence(g, K)
            for step in range(1, len(seq)):
                oracle = boruvka_threshold_partition(g, K, 2 * step)
                if not (refines(seq[step], oracle) and refines(oracle, seq[step])):
                    failures.append((name, "boruvka", step))
    crit.finish(failures)


def test_criterion_5_subadditivity():
    crit = Criterion(5, "sub-additivity", 30)
    failures = []
    for name, g, K in FIXTURES:
        if g.vertex_count > 8:
            continue
        if not check_subadditive(g, spec_steiner([K])).ok:
            failures.append((name, "steiner"))
        if len(K) % 2 == 0:
            pairs = [(K[2 * i], K[2 * i + 1]) for i in range(len(K) // 2)]
            if not check_subadditive(g, spec_match([pairs])).ok:
                failures.append((name, "match"))
    adv = spec_custom(
        [lambda c: 1 if min(len(c.side), c.vertex_count - len(c.side)) == 2 else 0]
    )
    if check_subadditive(path_graph(4), adv).ok:
        failures.append("adversarial not detected")
    crit.finish(failures)


def _exhaustive_cases():
    """(graph, groups, protocol factory) cases with |V| <= 6, k <= 4."""
    p6 = path_graph(6)
    st5 = star_graph(4)
    cases = []
    for g, terminals in [
        (p6, (0, 5)),
        (p6, (0, 2, 5)),
        (p6, (0, 2, 4, 5)),
        (st5, (1, 3)),
        (st5, (1, 2, 3)),
        (st5, (1, 2, 3, 4)),
    ]:
        groups = GroupedTerminals((terminals,))
        cases.append((g, groups, protocol_xor_aggregate))
        cases.append((g, groups, protocol_disj_and))
    for g, groups in [
        (p6, GroupedTerminals(((0, 5),), matchings=(((0, 5),),))),
        (p6, GroupedTerminals(((0, 2, 4, 5),), matchings=(((0, 5), (2, 4)),))),
        (p6, GroupedTerminals(((0, 2), (4, 5)), matchings=(((0, 2),), ((4, 5),)))),
        (st5, GroupedTerminals(((1, 2, 3, 4),), matchings=(((1, 3), (2, 4)),))),
    ]:
        cases.append((g, groups, protocol_xor_ip))
    return cases


def test_criterion_6_deterministic_protocols_exhaustive():
    crit = Criterion(6, "deterministic protocol correctness", 120)
    failures = []
    for g, groups, factory in _exhaustive_cases():
        k = len(groups.slots)
        for n in (1, 2, 3):
            proto = factory(n)
            slots = groups.slots
            for packed in range(2 ** (n * k)):
                bits = {
                    slot: (packed >> (n * j)) & ((1 << n) - 1)
                    for j, slot in enumerate(slots)
                }
                inputs = InputAssignment(n=n, bits=bits)
                tr = run(g, groups, proto, inputs, seed=0)
                if tr.output != evaluate_function(proto, groups, inputs):
                    failures.append((factory.__name__, n, packed))
                    break
            if failures:
                break
    # cost accounting identities
    p4 = path_graph(4)
    pair = GroupedTerminals(((0, 3),))
    tr = run(
        p4, pair, protocol_xor_aggregate(8),
        InputAssignment(n=8, bits={(0, 0): 1, (0, 1): 2}), seed=0,
    )
    if tr.total != 24:
        failures.append(("xor-cost", tr.total))
    tr = run(
        p4, pair, protocol_disj_and(8),
        InputAssignment(n=8, bits={(0, 0): 1, (0, 1): 2}), seed=0,
    )
    if tr.total != 24:
        failures.append(("disj-cost", tr.total))
    gm = GroupedTerminals(((0, 1, 2, 3),), matchings=(((0, 3), (1, 2)),))
    tr = run(
        p4, gm, protocol_xor_ip(4),
        InputAssignment(n=4, bits={(0, 0): 1, (0, 1): 2, (0, 2): 3, (0, 3): 4}),
        seed=0,
    )
    if tr.aux["stage_pair_exchange"] != 4 * matching_distance(p4, [(0, 3), (1, 2)]):
        failures.append(("xor-ip pair stage", tr.aux))
    if tr.total != (
        tr.aux["stage_pair_exchange"]
        + tr.aux["stage_group_fold"]
        + tr.aux["stage_rep_fold"]
    ):
        failures.append(("xor-ip decomposition", tr.aux, tr.total))
    crit.finish(failures)


def test_criterion_7_randomized_error_bounds():
    crit = Criterion(7, "randomized protocol error bounds", 120)
    failures = []
    runs = 10 ** 4
    p4 = path_graph(4)
    pair = GroupedTerminals(((0, 3),))
    st5 = star_graph(4)
    leaves = GroupedTerminals(((1, 2, 3, 4),))
    two = GroupedTerminals(((0, 1), (2, 3)))

    def check(name, protocol, g, groups, inputs, analytic, err_fn):
        errs = sum(err_fn(run(g, groups, protocol, inputs, seed=s)) for s in range(runs))
        rate = errs / runs
        sd = math.sqrt(analytic * (1 - analytic) / runs)
        if rate > 1 / 3 + 0.03:
            failures.append((name, "error bound", rate))
        if abs(rate - analytic) > 3 * sd:
            failures.append((name, "analytic mismatch", rate, analytic, sd))

    # equality on unequal inputs: miss probability exactly 2^-hash_bits
    check(
        "equality_hash",
        protocol_equality_hash(2),
        p4,
        pair,
        InputAssignment(n=6, bits={(0, 0): 33, (0, 1): 12}),
        2.0 ** -2,
        lambda tr: tr.output,  # output 1 = missed inequality
    )
    # element distinctness on distinct inputs: inclusion-exclusion oracle
    values = [1, 2, 5, 14]
    check(
        "ed_median",
        protocol_ed_median(8),
        st5,
        leaves,
        InputAssignment(n=4, bits={(0, j): v for j, v in enumerate(values)}),
        exact_collision_probability(pairwise_diffs(values), 8),
        lambda tr: 1 - tr.output,  # output 0 = false collision
    )
    # composed: distinct group-xors collide with probability 2^-hash_bits
    check(
        "ed_xor",
        protocol_ed_xor(8),
        p4,
        two,
        InputAssignment(n=6, bits={(0, 0): 10, (0, 1): 20, (1, 0): 26, (1, 1): 5}),
        2.0 ** -8,
        lambda tr: 1 - tr.output,
    )
    # composed: one distinct pair group (error iff its fingerprints collide),
    # one duplicated group (never errs)
    check(
        "xor_ed",
        protocol_xor_ed(4),
        p4,
        two,
        InputAssignment(n=6, bits={(0, 0): 9, (0, 1): 5, (1, 0): 7, (1, 1): 7}),
        2.0 ** -4,
        lambda tr: 1 - tr.output,  # true value is 1
    )
    crit.finish(failures)


def test_criterion_8_measured_feasibility_zero_tolerance():
    crit = Criterion(8, "measured-vector feasibility", 30)
    failures = []
    n = 8
    for name, g, K in FIXTURES:
        groups = GroupedTerminals((tuple(K),))
        rep = measured_vector_feasibility(
            g,
            groups,
            protocol_xor_aggregate(n),
            lambda s, gg=groups: dist_uniform_iid(gg, n, seed=s),
            2,
            spec_steiner([K]),
            float(n),
        )
        if not rep.feasible:
            failures.append((name, rep.violations))
        # zero-tolerance deterministic recheck: scaled vector is exactly 1
        # on tree edges and every separating cut must catch one
        tree = steiner_tree_approx(g, K)
        vec = rep.mean_vector
        for e, (u, v) in enumerate(g.edges):
            expect = 1.0 if (u, v) in tree.edges else 0.0
            if vec[e] != expect:
                failures.append((name, "vector", e, vec[e]))
    crit.finish(failures)


def test_criterion_9_cut_collections():
    crit = Criterion(9, "checked cut collections", 60)
    failures = []
    for name, g, K in FIXTURES:
        cuts, beta = bourgain_cut_collection(g, seed=42)
        if not verify_separation(g, cuts):
            failures.append((name, "separation"))
        sig, _ = sigma(g, K)
        if float(lp_mdn(g, K)) + TOL < sig / beta:
            failures.append((name, "mdn-bound", beta))
    crit.finish(failures)


def test_criterion_10_upper_bound_conformance():
    crit = Criterion(10, "upper-bound formula conformance", 60)
    failures = []
    rng = np.random.default_rng(99)
    for i in range(10):
        n_v = int(rng.integers(5, 10))
        g = random_connected_graph(n_v, seed=int(rng.integers(0, 2 ** 31)))
        verts = rng.permutation(n_v)
        g1 = tuple(int(v) for v in verts[:2])
        g2 = tuple(int(v) for v in verts[2:4])
        groups = GroupedTerminals((g1, g2))
        n_bits = 6
        hb = 8
        inputs = dist_uniform_iid(groups, n_bits, seed=500 + i)

        tr = run(g, groups, protocol_ed_xor(hb), inputs, seed=i)
        trees = sum(
            len(steiner_tree_approx(g, set(grp)).edges) for grp in groups.groups
        )
        if tr.total > hb * (sigma_grouped(g, groups) + 2 * trees):
            failures.append(("ed_xor", i, tr.total))

        tr = run(g, groups, protocol_xor_ed(hb), inputs, seed=i)
        sig_sum = sum(sigma(g, list(grp))[0] for grp in groups.groups)
        meds = set(tr.aux["medians"])
        rep_edges = len(steiner_tree_approx(g, meds).edges) if len(meds) > 1 else 0
        if tr.total != hb * sig_sum + rep_edges:
            failures.append(("xor_ed", i, tr.total, hb * sig_sum + rep_edges))

        gm = GroupedTerminals(
            (g1, g2), matchings=((tuple(g1),), (tuple(g2),))
        )
        tr = run(g, gm, protocol_xor_ip(n_bits), inputs, seed=i)
        pair_d = sum(matching_distance(g, m) for m in gm.matchings)
        if tr.aux["stage_pair_exchange"] != n_bits * pair_d:
            failures.append(("xor_ip pair stage", i))
        if tr.total != (
            tr.aux["stage_pair_exchange"]
            + tr.aux["stage_group_fold"]
            + tr.aux["stage_rep_fold"]
        ):
            failures.append(("xor_ip total", i))
    crit.finish(failures)
