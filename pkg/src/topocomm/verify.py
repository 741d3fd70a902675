"""Property batteries behind the CLI verify suites.

Each suite returns a list of (name, passed, detail) checks; suites are
sized to run in seconds and mirror the package's invariants.
"""

from __future__ import annotations

from .cuts import (
    bourgain_cut_collection,
    check_subadditive,
    spec_custom,
    spec_grouped,
    spec_match,
    spec_steiner,
    verify_separation,
)
from .distributions import dist_uniform_iid
from .embedding import sample_subtree, verify_transfer
from .graph import (
    Graph,
    GroupedTerminals,
    cycle_graph,
    grid_graph,
    matching_distance,
    path_graph,
    random_connected_graph,
    random_tree,
    sigma,
    star_graph,
    steiner_tree_exact,
    worst_case_matching,
)
from .lp import (
    build_lower_lp,
    build_upper_lp,
    lp_mdn,
    lp_mtch,
    lp_st,
    solve,
    tree_closed_form,
)
from .multicut import (
    boruvka_threshold_partition,
    build_partition_sequence,
    chunk_into_family,
    ell_bound,
    family_cost_check,
    refines,
    verify_family,
)
from .protocols import (
    InputAssignment,
    evaluate_function,
    measured_vector_feasibility,
    protocol_disj_and,
    protocol_equality_hash,
    protocol_xor_aggregate,
    protocol_xor_ip,
    run,
)

TOL = 1e-6


def _fixture_instances():
    return [
        ("path4", path_graph(4), [0, 3]),
        ("star5", star_graph(4), [1, 2, 3, 4]),
        ("triangle", Graph(3, ((0, 1), (1, 2), (0, 2))), [0, 1, 2]),
        ("cycle6", cycle_graph(6), [0, 2, 4]),
        ("grid9", grid_graph(3, 3), [0, 2, 6, 8]),
    ]


def _random_instance(seed, max_n=10):
    import numpy as np

    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, max_n + 1))
    g = random_connected_graph(n, seed=int(rng.integers(0, 2 ** 31)))
    k = int(rng.integers(2, min(n, 6) + 1))
    K = sorted(rng.choice(n, size=k, replace=False).tolist())
    return g, K


def _random_grouped(seed, max_n=10, even=False):
    import numpy as np

    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, max_n + 1))
    g = random_connected_graph(n, seed=int(rng.integers(0, 2 ** 31)))
    t = int(rng.integers(1, 4))
    groups = []
    for _ in range(t):
        size = int(rng.integers(2, 5))
        if even and size % 2:
            size += 1
        grp = rng.choice(n, size=min(size, n), replace=False).tolist()
        if even and len(grp) % 2:
            grp = grp[:-1]
        if len(grp) >= 2:
            groups.append(tuple(int(v) for v in grp))
    if not groups:
        groups = [(0, 1)]
    matchings = tuple(
        tuple((grp[2 * i], grp[2 * i + 1]) for i in range(len(grp) // 2))
        for grp in groups
    ) if even else None
    return g, GroupedTerminals(tuple(groups), matchings=matchings)


def suite_lp_relations(instances=20, seed=0):
    checks = []
    for i in range(instances):
        g, K = _random_instance(seed + i)
        st = steiner_tree_exact(g, K).cost
        lp = float(lp_st(g, K))
        checks.append(
            (
                f"steiner-sandwich[{i}]",
                lp <= st + TOL and st <= 2 * lp + TOL,
                f"lp_st={lp:.6f} st={st}",
            )
        )
        lo = float(solve(build_lower_lp(g, spec_steiner([K]))).objective)
        up = float(solve(build_upper_lp(g, spec_steiner([K]))).objective)
        checks.append((f"lower-le-upper[{i}]", lo <= up + TOL, f"{lo:.6f} <= {up:.6f}"))
        cuts, beta = bourgain_cut_collection(g, seed=seed + i)
        sep = verify_separation(g, cuts)
        sig, _ = sigma(g, K)
        mdn = float(lp_mdn(g, K))
        checks.append(
            (
                f"mdn-vs-sigma[{i}]",
                sep and mdn + TOL >= sig / beta,
                f"lp_mdn={mdn:.4f} sigma/beta={sig}/{beta}",
            )
        )
        if len(K) % 2 == 0:
            wm = worst_case_matching(g, K)
            d = matching_distance(g, wm.pairs)
            mt = float(lp_mtch(g, K, wm.pairs))
            ok = (d / beta) - TOL <= mt <= d + TOL and sig / 2 <= wm.value <= sig
            checks.append(
                (f"mtch-sandwich[{i}]", ok, f"lp_mtch={mt:.4f} d={d} beta={beta}")
            )
    return checks


def suite_tree_equality(trees=10, seed=0):
    checks = []
    import numpy as np

    rng = np.random.default_rng(seed)
    for i in range(trees):
        n = int(rng.integers(4, 11))
        t = random_tree(n, seed=int(rng.integers(0, 2 ** 31)))
        g_grouped = _pick_groups(t, rng)
        spec = spec_grouped(g_grouped)
        lo = float(solve(build_lower_lp(t, spec)).objective)
        up = float(solve(build_upper_lp(t, spec)).objective)
        cf = tree_closed_form(t, spec)
        ok = abs(lo - up) <= TOL and abs(lo - cf) <= TOL
        checks.append((f"tree-equality[{i}]", ok, f"lower={lo:.6f} upper={up:.6f} closed={cf}"))
    return checks


def _pick_groups(g, rng, even=False):
    n = g.vertex_count
    t = int(rng.integers(1, 4))
    groups = []
    for _ in range(t):
        size = int(rng.integers(2, min(4, n) + 1))
        grp = tuple(int(v) for v in rng.choice(n, size=size, replace=False))
        groups.append(grp)
    return GroupedTerminals(tuple(groups))


def suite_embedding_transfer(instances=10, seed=0):
    checks = []
    import numpy as np

    rng = np.random.default_rng(seed)
    for i in range(instances):
        g, K = _random_instance(seed + 1000 + i, max_n=8)
        spec = spec_steiner([K])
        for strategy in ("random-mst", "shortest-path-tree"):
            t = sample_subtree(g, strategy=strategy, seed=int(rng.integers(0, 2 ** 31)))
            rep = verify_transfer(g, t, spec)
            ratio_ok = rep.lp_t <= float(rep.max_stretch) * rep.lp_g + TOL
            checks.append(
                (
                    f"transfer[{i}:{strategy}]",
                    rep.ok and ratio_ok,
                    f"lp_g={rep.lp_g:.4f} lp_t={rep.lp_t:.4f} stretch={float(rep.max_stretch):.3f}",
                )
            )
    return checks


def suite_multicut_family(instances=10, seed=0):
    checks = []
    cases = [(name, g, K) for name, g, K in _fixture_instances()]
    for i in range(instances):
        g, K = _random_instance(seed + 2000 + i)
        cases.append((f"random[{i}]", g, K))
    for name, g, K in cases:
        if len(set(K)) < 2:
            continue
        fam = chunk_into_family(g, K)
        rep = verify_family(g, fam)
        cost = family_cost_check(g, K)
        k = len(set(K))
        ok = rep.ok and cost.ok and fam.ell <= ell_bound(k)
        seq = build_partition_sequence(g, K)
        bor_ok = True
        if k <= 8:
            for step in range(1, len(seq)):
                oracle = boruvka_threshold_partition(g, K, 2 * step)
                if not (refines(seq[step], oracle) and refines(oracle, seq[step])):
                    bor_ok = False
        checks.append(
            (
                f"multicut[{name}]",
                ok and bor_ok,
                f"ell={fam.ell} sum={cost.sum_sizes} mst={cost.mst_closure_cost}",
            )
        )
    return checks


def suite_subadditivity(seed=0):
    checks = []
    for name, g, K in _fixture_instances():
        if g.vertex_count > 8:
            continue
        rep = check_subadditive(g, spec_steiner([K]))
        checks.append((f"steiner-subadd[{name}]", rep.ok, f"{len(rep.violations)} violations"))
        if len(K) % 2 == 0:
            pairs = [(K[2 * i], K[2 * i + 1]) for i in range(len(K) // 2)]
            rep = check_subadditive(g, spec_match([pairs]))
            checks.append((f"match-subadd[{name}]", rep.ok, f"{len(rep.violations)} violations"))
    g4 = path_graph(4)
    adv = spec_custom(
        [lambda c: 1 if min(len(c.side), c.vertex_count - len(c.side)) == 2 else 0],
        label="adversarial",
    )
    rep = check_subadditive(g4, adv)
    checks.append(("adversarial-detected", not rep.ok, f"{len(rep.violations)} violations"))
    return checks


def suite_protocol_correctness(seed=0):
    checks = []
    p4 = path_graph(4)
    g1 = GroupedTerminals(((0, 3),))
    ok = True
    for n in (1, 2, 3):
        proto = protocol_xor_aggregate(n)
        for a in range(1 << n):
            for b in range(1 << n):
                inputs = InputAssignment(n=n, bits={(0, 0): a, (0, 1): b})
                tr = run(p4, g1, proto, inputs, seed=0)
                if tr.output != evaluate_function(proto, g1, inputs):
                    ok = False
    checks.append(("xor-exhaustive", ok, "n<=3 k=2 path"))
    tr = run(
        p4,
        g1,
        protocol_xor_aggregate(8),
        InputAssignment(n=8, bits={(0, 0): 170, (0, 1): 85}),
        seed=0,
    )
    checks.append(("xor-cost-24", tr.total == 24, f"total={tr.total}"))
    ok = True
    proto = protocol_disj_and(2)
    for a in range(4):
        for b in range(4):
            inputs = InputAssignment(n=2, bits={(0, 0): a, (0, 1): b})
            tr = run(p4, g1, proto, inputs, seed=0)
            if tr.output != evaluate_function(proto, g1, inputs):
                ok = False
    checks.append(("disj-exhaustive", ok, "n=2 k=2 path"))
    gm = GroupedTerminals(((0, 1), (2, 3)), matchings=(((0, 1),), ((2, 3),)))
    proto = protocol_xor_ip(2)
    ok = True
    for val in range(256):
        bits = {
            (0, 0): val & 3,
            (0, 1): (val >> 2) & 3,
            (1, 0): (val >> 4) & 3,
            (1, 1): (val >> 6) & 3,
        }
        inputs = InputAssignment(n=2, bits=bits)
        tr = run(p4, gm, proto, inputs, seed=0)
        if tr.output != evaluate_function(proto, gm, inputs):
            ok = False
    checks.append(("xor-ip-exhaustive", ok, "n=2 two pairs"))
    # randomized: equality detection at 2 hash bits
    errs = 0
    runs = 800
    uneq = InputAssignment(n=4, bits={(0, 0): 9, (0, 1): 5})
    for s in range(runs):
        errs += run(p4, g1, protocol_equality_hash(2), uneq, seed=seed + s).output
    rate = errs / runs
    checks.append(("equality-error", rate <= 1 / 3 + 0.05, f"error={rate:.3f}"))
    return checks


def suite_feasibility(seed=0):
    checks = []
    for name, g, K in _fixture_instances():
        groups = GroupedTerminals((tuple(K),))
        n = 8
        rep = measured_vector_feasibility(
            g,
            groups,
            protocol_xor_aggregate(n),
            lambda s, gg=groups: dist_uniform_iid(gg, n, seed=s),
            3,
            spec_steiner([K]),
            float(n),
            seed=seed,
        )
        checks.append(
            (f"xor-feasible[{name}]", rep.feasible, f"{rep.checked_cuts} cuts checked")
        )
    return checks


SUITES = {
    "lp-relations": suite_lp_relations,
    "tree-equality": suite_tree_equality,
    "embedding-transfer": suite_embedding_transfer,
    "multicut-family": suite_multicut_family,
    "subadditivity": suite_subadditivity,
    "protocol-correctness": suite_protocol_correctness,
    "feasibility": suite_feasibility,
}


def run_suite(name, seed=0):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed=seed)
