#!/usr/bin/env python3
"""Regenerate fixtures/expected/*.json from the brute-force oracles.

The expected files pin the fixture quantities that the CLI and the test
suite check against: exact Steiner cost (subset enumeration), status and
median, LP optima, closure-MST cost, and the multicut-sequence size sum.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from topocomm.graph import load_graph_file, sigma, steiner_tree_exact  # noqa: E402
from topocomm.lp import lp_mdn, lp_st  # noqa: E402
from topocomm.multicut import chunk_into_family, family_cost_check  # noqa: E402

FIXDIR = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")


def main():
    outdir = os.path.join(FIXDIR, "expected")
    os.makedirs(outdir, exist_ok=True)
    for name in sorted(os.listdir(FIXDIR)):
        if not name.endswith(".graph"):
            continue
        g, groups = load_graph_file(os.path.join(FIXDIR, name))
        K = list(groups.terminals)
        sig, med = sigma(g, K)
        expected = {
            "st_exact": steiner_tree_exact(g, K).cost,
            "sigma": sig,
            "median": med,
            "lp_st": float(lp_st(g, K)),
            "lp_mdn": float(lp_mdn(g, K)),
        }
        if len(set(K)) >= 2:
            cost = family_cost_check(g, K)
            expected["multicut_sum_sizes"] = cost.sum_sizes
            expected["mst_closure_cost"] = cost.mst_closure_cost
            expected["family_ell"] = chunk_into_family(g, K).ell
        out = os.path.join(outdir, name.replace(".graph", ".json"))
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(expected, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
