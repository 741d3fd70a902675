"""Command-line front end: bounds reports, protocol simulation, property
suites, and multicut/embedding artifact dumps.

Every report field is a {value, source, mode} record; ``source`` names the
mathematical origin of the quantity and ``mode`` is one of
exact | lp | measured | heuristic.  JSON reports carry ``schema: 1``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from .cuts import bourgain_cut_collection, cuts_to_json, spec_steiner
from .distributions import dist_distinct, dist_uniform_iid, dist_xor_ed
from .embedding import best_subtree, sample_subtree, stretch, STRATEGIES
from .errors import ParseError, TopocommError
from .graph import (
    load_graph_file,
    matching_distance,
    sigma,
    sigma_grouped,
    steiner_tree_approx,
    steiner_tree_exact,
    worst_case_matching,
)
from .lp import build_lower_lp, dump_lp_text, lp_mdn, lp_mtch, lp_st
from .multicut import chunk_into_family, family_cost_check, family_to_json, verify_family
from .protocols import (
    PROTOCOL_FACTORIES,
    default_hash_bits,
    evaluate_function,
    formula_bound,
    run,
)
from .verify import SUITES, run_suite

SCHEMA = 1


def _field(value, source, mode):
    return {"value": value, "source": source, "mode": mode}


def _load(path):
    g, groups = load_graph_file(path)
    return g, groups


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2, default=str)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_bounds(args):
    g, groups = _load(args.graph)
    if groups is None:
        raise ParseError("bounds needs terminal lines (t <group> <vertex>)", 0)
    K = list(groups.terminals)
    k_slots = len(groups.slots)
    hb = default_hash_bits(k_slots)
    exact = args.exact_rational

    report = {"schema": SCHEMA, "graph": {"vertices": g.vertex_count, "edges": len(g.edges)}}
    st_approx = steiner_tree_approx(g, K)
    report["st_approx"] = _field(
        st_approx.cost, "pruned MST of the terminal metric closure", "heuristic"
    )
    if g.vertex_count <= 12:
        report["st_exact"] = _field(
            steiner_tree_exact(g, K).cost, "Steiner-point subset enumeration", "exact"
        )
    sig, med = sigma(g, K)
    report["sigma"] = _field(sig, "minimum status over vertices", "exact")
    report["median"] = _field(med, "status-minimizing vertex", "exact")
    report["sigma_grouped"] = _field(
        sigma_grouped(g, groups), "minimum status over one-per-group representatives", "exact"
    )
    val = lp_st(g, K, exact=exact)
    report["lp_st"] = _field(
        float(val) if not exact else str(val),
        "covering LP over terminal-separating cuts",
        "lp",
    )
    val = lp_mdn(g, K, exact=exact)
    report["lp_mdn"] = _field(
        float(val) if not exact else str(val),
        "covering LP with min-side terminal-count demands",
        "lp",
    )
    per_group_st = [
        steiner_tree_approx(g, set(grp)).cost for grp in groups.groups
    ]
    report["st_per_group"] = _field(
        per_group_st, "per-group pruned closure-MST cost", "heuristic"
    )
    sigmas = [sigma(g, list(grp))[0] for grp in groups.groups]
    report["sigma_per_group"] = _field(sigmas, "per-group minimum status", "exact")
    if groups.matchings is not None:
        dms = [matching_distance(g, pairs) for pairs in groups.matchings]
        report["matching_distance_per_group"] = _field(
            dms, "sum of matched-pair distances", "exact"
        )
        flat = [p for pairs in groups.matchings for p in pairs]
        val = lp_mtch(g, K, flat, exact=exact)
        report["lp_mtch"] = _field(
            float(val) if not exact else str(val),
            "covering LP with separated-pair-count demands",
            "lp",
        )
    if len(K) % 2 == 0:
        wm = worst_case_matching(g, K)
        report["worst_case_matching"] = _field(
            wm.value,
            "maximum total distance over disjoint pairings",
            "exact" if wm.exact else "heuristic",
        )
    cuts, beta = bourgain_cut_collection(g, seed=args.seed)
    report["cut_collection_beta"] = _field(
        beta, "max cuts crossing one edge in the checked threshold-cut collection", "measured"
    )
    report["composed_upper_ed_xor"] = _field(
        hb * (sigma_grouped(g, groups) + 2 * sum(per_group_st)),
        "hash_bits*(grouped status + 2*sum of group tree costs)",
        "measured",
    )
    meds = [sigma(g, list(grp))[1] for grp in groups.groups]
    rep_tree = steiner_tree_approx(g, set(meds)) if len(set(meds)) > 1 else None
    rep_cost = rep_tree.cost if rep_tree else 0
    report["composed_upper_xor_ed"] = _field(
        hb * sum(sigmas) + rep_cost,
        "hash_bits*sum of group statuses + median-tree cost",
        "measured",
    )
    report["lower_ed_shape"] = _field(
        sig / beta, "status / measured collection parameter", "measured"
    )
    report["lower_sd_shape"] = _field(
        st_approx.cost / max(1, math.ceil(math.log2(max(2, k_slots)))) ** 2,
        "tree cost / squared log of terminal count",
        "measured",
    )
    tree, srep = best_subtree(g, seeds=8)
    report["lower_ed_xor_shape"] = _field(
        sigma_grouped(g, groups) / beta + sum(per_group_st) / max(srep.max, 1.0),
        "grouped status / measured collection parameter + group tree costs / measured stretch",
        "measured",
    )
    report["lower_xor_ed_shape"] = _field(
        rep_cost + sum(sigmas) / beta,
        "median-tree cost + group statuses / measured collection parameter",
        "measured",
    )
    if args.dump_lp:
        print(dump_lp_text(build_lower_lp(g, spec_steiner([K]))))
    if args.dump_cuts:
        print(json.dumps(cuts_to_json(cuts)))
    _emit_json(report, args.json)
    return 0


def _make_distribution(name, groups, n):
    if name == "uniform":
        return lambda s: dist_uniform_iid(groups, n, seed=s)
    if name == "distinct":
        return lambda s: dist_distinct(groups, n, seed=s)
    if name == "xor-ed-pairs":
        return lambda s: dist_xor_ed(groups, n, seed=s)
    raise ValueError(f"unknown distribution {name!r}")


def cmd_simulate(args):
    g, groups = _load(args.graph)
    if groups is None:
        raise ParseError("simulate needs terminal lines", 0)
    if args.protocol not in PROTOCOL_FACTORIES:
        print(
            f"error: unknown protocol {args.protocol!r}; "
            f"choose from {sorted(PROTOCOL_FACTORIES)}",
            file=sys.stderr,
        )
        return 2
    factory = PROTOCOL_FACTORIES[args.protocol]
    if args.protocol in ("xor_aggregate", "disj_and", "xor_ip"):
        protocol = factory(args.n)
    elif args.protocol == "equality_hash":
        protocol = factory(args.hash_bits or 2)
    else:
        protocol = factory(args.hash_bits)
    distribution = _make_distribution(args.dist, groups, args.n)

    rows = []
    errors = 0
    totals = []
    for r in range(args.runs):
        seed = args.seed + r
        inputs = distribution(seed)
        trace = run(g, groups, protocol, inputs, seed=seed)
        truth = evaluate_function(protocol, groups, inputs)
        correct = int(trace.output == truth)
        errors += 1 - correct
        totals.append(trace.total)
        rows.append(
            {"seed": seed, "total_bits": trace.total, "output": trace.output, "correct": correct}
        )
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["seed", "total_bits", "output", "correct"])
            writer.writeheader()
            writer.writerows(rows)
    bound = formula_bound(protocol, g, groups, args.n)
    summary = {
        "schema": SCHEMA,
        "protocol": args.protocol,
        "runs": args.runs,
        "mean_cost": _field(sum(totals) / len(totals), "empirical mean total bits", "measured"),
        "max_cost": _field(max(totals), "empirical max total bits", "measured"),
        "error_rate": _field(errors / args.runs, "empirical error frequency", "measured"),
        "formula_bound": _field(bound, "protocol cost formula with measured parameters", "measured"),
        "within_formula_bound": _field(max(totals) <= bound, "max cost vs formula bound", "measured"),
    }
    _emit_json(summary, args.json)
    return 0


def cmd_verify(args):
    names = [args.suite] if args.suite else sorted(SUITES)
    all_ok = True
    results = {}
    for name in names:
        checks = run_suite(name, seed=args.seed)
        ok = all(passed for _n, passed, _d in checks)
        all_ok &= ok
        results[name] = [
            {"check": cname, "passed": bool(passed), "detail": detail}
            for cname, passed, detail in checks
        ]
        for cname, passed, detail in checks:
            print(f"[{'PASS' if passed else 'FAIL'}] {name}:{cname}  {detail}")
        print(f"suite {name}: {'PASS' if ok else 'FAIL'}")
    if args.json:
        _emit_json({"schema": SCHEMA, "suites": results, "passed": all_ok}, args.json)
    return 0 if all_ok else 1


def cmd_multicut(args):
    g, groups = _load(args.graph)
    if groups is None:
        raise ParseError("multicut needs terminal lines", 0)
    K = list(groups.terminals)
    fam = chunk_into_family(g, K)
    rep = verify_family(g, fam)
    cost = family_cost_check(g, K)
    report = {
        "schema": SCHEMA,
        "ell": _field(fam.ell, "number of chunked collections", "exact"),
        "alpha": _field("1/3", "surviving-singleton fraction", "exact"),
        "properties_ok": _field(rep.ok, "containment/disjointness/singleton checks", "exact"),
        "sum_sizes": _field(cost.sum_sizes, "total explicit-set count over the sequence", "exact"),
        "mst_closure_cost": _field(cost.mst_closure_cost, "MST of the terminal closure", "exact"),
    }
    if args.dump_family:
        report["family"] = family_to_json(fam)
    _emit_json(report, args.json)
    return 0 if rep.ok and cost.ok else 1


def cmd_embed(args):
    g, _groups = _load(args.graph)
    if args.strategy == "best":
        (tree, rep) = best_subtree(g, seeds=args.seeds)
    else:
        tree = sample_subtree(g, strategy=args.strategy, seed=args.seed)
        rep = stretch(g, tree)
    report = {
        "schema": SCHEMA,
        "strategy": args.strategy,
        "tree_edges": [list(e) for e in tree.edges],
        "stretch_avg": _field(rep.avg, "mean pairwise tree/graph distance ratio", "measured"),
        "stretch_max": _field(rep.max, "max pairwise tree/graph distance ratio", "measured"),
        "stretch_weighted_avg": _field(
            rep.weighted_avg, "edge-weighted mean tree distance", "measured"
        ),
    }
    _emit_json(report, args.json)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="topocomm",
        description="Topology-sensitive communication bounds: LP values, "
        "multicut families, subtree embeddings, and protocol simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="compute bound quantities for a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--json", default=None, help="write the JSON report here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-rational", action="store_true")
    p.add_argument("--dump-lp", action="store_true")
    p.add_argument("--dump-cuts", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="run a protocol repeatedly and summarize")
    p.add_argument("--graph", required=True)
    p.add_argument("--protocol", required=True)
    p.add_argument("--dist", default="uniform", choices=["uniform", "distinct", "xor-ed-pairs"])
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--hash-bits", type=int, default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument("--suite", default=None, choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("multicut", help="build and check the multicut family")
    p.add_argument("--graph", required=True)
    p.add_argument("--dump-family", action="store_true")
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_multicut)

    p = sub.add_parser("embed", help="sample a spanning subtree and measure stretch")
    p.add_argument("--graph", required=True)
    p.add_argument("--strategy", default="best", choices=list(STRATEGIES) + ["best"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=32)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_embed)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except TopocommError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
