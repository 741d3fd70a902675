import itertools
import math

import pytest
from hypothesis import given, strategies as st

from topocomm.cuts import Cut, spec_steiner
from topocomm.distributions import dist_uniform_iid
from topocomm.errors import MissingMatchings, ShapeMismatch
from topocomm.graph import (
    GroupedTerminals,
    path_graph,
    sigma,
    sigma_grouped,
    star_graph,
    steiner_tree_approx,
)
from topocomm.protocols import (
    InputAssignment,
    cut_projection,
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

from oracles import exact_collision_probability

P4 = path_graph(4)
PAIR = GroupedTerminals(((0, 3),))


def assign(n, *values, groups=None):
    groups = groups or PAIR
    bits = {slot: v for slot, v in zip(groups.slots, values)}
    return InputAssignment(n=n, bits=bits)


# --- run() contract ----------------------------------------------------------


def test_same_seed_same_trace():
    inputs = dist_uniform_iid(PAIR, 8, seed=3)
    a = run(P4, PAIR, protocol_xor_aggregate(8), inputs, seed=9)
    b = run(P4, PAIR, protocol_xor_aggregate(8), inputs, seed=9)
    assert a.counts == b.counts and a.output == b.output


def test_zero_communication_single_vertex_group():
    g = path_graph(2)
    groups = GroupedTerminals(((0, 0),))  # both inputs at one vertex
    inputs = assign(4, 5, 9, groups=groups)
    tr = run(g, groups, protocol_xor_aggregate(4), inputs, seed=0)
    assert tr.total == 0
    assert tr.output == 5 ^ 9


def test_matchings_required():
    inputs = assign(4, 1, 2)
    with pytest.raises(MissingMatchings):
        run(P4, PAIR, protocol_xor_ip(4), inputs, seed=0)


def test_shape_mismatch_on_wrong_slots():
    inputs = InputAssignment(n=4, bits={(0, 0): 1})
    with pytest.raises(ShapeMismatch):
        run(P4, PAIR, protocol_xor_aggregate(4), inputs, seed=0)


def test_shape_mismatch_on_wrong_n():
    inputs = assign(4, 1, 2)
    with pytest.raises(ShapeMismatch):
        run(P4, PAIR, protocol_xor_aggregate(5), inputs, seed=0)


def test_multi_group_rejected_by_single_group_protocols():
    groups = GroupedTerminals(((0, 1), (2, 3)))
    inputs = assign(2, 1, 2, 3, 0, groups=groups)
    for proto in (
        protocol_xor_aggregate(2),
        protocol_disj_and(2),
        protocol_equality_hash(2),
        protocol_ed_median(4),
    ):
        with pytest.raises(ShapeMismatch):
            run(P4, groups, proto, inputs, seed=0)


# --- deterministic protocols ---------------------------------------------------


def test_xor_aggregate_cost_and_value():
    inputs = assign(8, 0b10101010, 0b01010101)
    tr = run(P4, PAIR, protocol_xor_aggregate(8), inputs, seed=0)
    assert tr.total == 24  # 3 tree edges x 8 bits
    assert tr.output == 0b11111111


def test_xor_aggregate_identical_inputs_zero():
    inputs = assign(8, 77, 77)
    assert run(P4, PAIR, protocol_xor_aggregate(8), inputs, seed=0).output == 0


@given(st.integers(1, 3), st.data())
def test_xor_aggregate_exhaustive_small(n, data):
    vals = [data.draw(st.integers(0, 2 ** n - 1)) for _ in range(2)]
    inputs = assign(n, *vals)
    proto = protocol_xor_aggregate(n)
    tr = run(P4, PAIR, proto, inputs, seed=0)
    assert tr.output == evaluate_function(proto, PAIR, inputs) == vals[0] ^ vals[1]


def test_disj_outputs_and_conventions():
    proto = protocol_disj_and(4)
    all_ones = assign(4, 15, 15)
    tr = run(P4, PAIR, proto, all_ones, seed=0)
    assert tr.output == 0 and tr.aux["intersection_nonempty"] == 1
    has_zero = assign(4, 0, 15)
    tr = run(P4, PAIR, proto, has_zero, seed=0)
    assert tr.output == 1 and tr.aux["intersection"] == 0
    assert tr.total == 12


def test_xor_ip_all_zero_and_all_one():
    gm = GroupedTerminals(((0, 1), (2, 3)), matchings=(((0, 1),), ((2, 3),)))
    proto = protocol_xor_ip(5)
    zero = assign(5, 0, 0, 0, 0, groups=gm)
    assert run(P4, gm, proto, zero, seed=0).output == 0
    ones_pair = assign(5, 31, 31, 0, 0, groups=gm)
    tr = run(P4, gm, proto, ones_pair, seed=0)
    assert tr.output == 1  # n odd: parity of the all-ones AND vector is 1
    # pair exchange counts exactly n * sum of matched distances
    assert tr.aux["stage_pair_exchange"] == 5 * (1 + 1)


def test_xor_ip_stage_decomposition():
    gm = GroupedTerminals(
        ((0, 1, 2, 3),), matchings=(((0, 3), (1, 2)),)
    )
    proto = protocol_xor_ip(3)
    inputs = assign(3, 7, 5, 3, 6, groups=gm)
    tr = run(P4, gm, proto, inputs, seed=0)
    parts = (
        tr.aux["stage_pair_exchange"]
        + tr.aux["stage_group_fold"]
        + tr.aux["stage_rep_fold"]
    )
    assert tr.total == parts
    assert tr.aux["stage_pair_exchange"] == 3 * (3 + 1)
    assert tr.output == evaluate_function(proto, gm, inputs)


# --- randomized protocols -------------------------------------------------------


def test_equality_all_equal_never_errs():
    proto = protocol_equality_hash(2)
    inputs = assign(6, 33, 33)
    for seed in range(50):
        assert run(P4, PAIR, proto, inputs, seed=seed).output == 1


def test_equality_cost_bound():
    proto = protocol_equality_hash(2)
    inputs = assign(6, 33, 12)
    tr = run(P4, PAIR, proto, inputs, seed=1)
    tree_edges = len(steiner_tree_approx(P4, [0, 3]).edges)
    assert tr.total <= (2 + 6) * tree_edges


def test_equality_detection_rate_matches_analytic():
    proto = protocol_equality_hash(2)
    inputs = assign(6, 33, 12)
    runs = 3000
    miss = sum(run(P4, PAIR, proto, inputs, seed=s).output for s in range(runs)) / runs
    expect = 2.0 ** -2
    sd = math.sqrt(expect * (1 - expect) / runs)
    assert abs(miss - expect) <= 4 * sd


def test_ed_median_cost_identity():
    st5 = star_graph(4)
    groups = GroupedTerminals(((1, 2, 3, 4),))
    inputs = assign(4, 1, 2, 5, 14, groups=groups)
    tr = run(st5, groups, protocol_ed_median(8), inputs, seed=0)
    assert tr.total == 8 * sigma(st5, [1, 2, 3, 4])[0]
    assert tr.output_vertex == 0


def test_ed_median_duplicates_always_rejected():
    st5 = star_graph(4)
    groups = GroupedTerminals(((1, 2, 3, 4),))
    inputs = assign(4, 3, 3, 5, 6, groups=groups)
    for seed in range(30):
        assert run(st5, groups, protocol_ed_median(8), inputs, seed=seed).output == 0


def test_ed_median_error_matches_inclusion_exclusion():
    st5 = star_graph(4)
    groups = GroupedTerminals(((1, 2, 3, 4),))
    values = [1, 2, 5, 14]
    inputs = assign(4, *values, groups=groups)
    hb = 4
    runs = 4000
    err = sum(
        1 - run(st5, groups, protocol_ed_median(hb), inputs, seed=s).output
        for s in range(runs)
    ) / runs
    expect = exact_collision_probability(
        [a ^ b for a, b in itertools.combinations(values, 2)], hb
    )
    sd = math.sqrt(expect * (1 - expect) / runs)
    assert abs(err - expect) <= 4 * sd


def test_ed_xor_equal_group_xors_always_zero():
    groups = GroupedTerminals(((0, 1), (2, 3)))
    inputs = assign(6, 10, 20, 26, 4, groups=groups)  # both xors = 30
    for seed in range(30):
        assert run(P4, groups, protocol_ed_xor(8), inputs, seed=seed).output == 0


def test_ed_xor_cost_formula():
    groups = GroupedTerminals(((0, 1), (2, 3)))
    inputs = assign(6, 10, 20, 26, 1, groups=groups)
    hb = 6
    tr = run(P4, groups, protocol_ed_xor(hb), inputs, seed=3)
    trees = sum(
        len(steiner_tree_approx(P4, set(grp)).edges) for grp in groups.groups
    )
    bound = hb * (sigma_grouped(P4, groups) + 2 * trees)
    assert tr.total <= bound
    assert tr.aux["stage_group_hashing"] == hb * 2 * trees
    assert tr.aux["stage_median_gather"] == hb * sigma_grouped(P4, groups)


def test_xor_ed_duplicated_groups_always_zero():
    groups = GroupedTerminals(((0, 1), (2, 3)))
    inputs = assign(6, 9, 9, 7, 7, groups=groups)
    for seed in range(30):
        assert run(P4, groups, protocol_xor_ed(6), inputs, seed=seed).output == 0


def test_xor_ed_cost_decomposition():
    groups = GroupedTerminals(((0, 1), (2, 3)))
    inputs = assign(6, 9, 5, 7, 7, groups=groups)
    hb = 6
    tr = run(P4, groups, protocol_xor_ed(hb), inputs, seed=2)
    sig_total = sum(sigma(P4, list(grp))[0] for grp in groups.groups)
    assert tr.aux["stage_group_ed"] == hb * sig_total
    meds = set(tr.aux["medians"])
    rep_edges = (
        len(steiner_tree_approx(P4, meds).edges) if len(meds) > 1 else 0
    )
    assert tr.aux["stage_xor_fold"] == rep_edges
    assert tr.total == tr.aux["stage_group_ed"] + tr.aux["stage_xor_fold"]


def test_xor_ed_one_distinct_group_mostly_one():
    groups = GroupedTerminals(((0, 1), (2, 3)))
    inputs = assign(6, 9, 5, 7, 7, groups=groups)
    runs = 2000
    hits = sum(
        run(P4, groups, protocol_xor_ed(6), inputs, seed=s).output for s in range(runs)
    )
    assert hits / runs >= 2 / 3


# --- projections and measured feasibility ------------------------------------------


def test_cut_projection_example():
    inputs = assign(8, 3, 7)
    tr = run(P4, PAIR, protocol_xor_aggregate(8), inputs, seed=0)
    assert cut_projection(tr, P4, Cut(4, frozenset({0}))) == 8


def test_cut_projection_edge_cuts_sum_to_total():
    inputs = assign(8, 3, 7)
    tr = run(P4, PAIR, protocol_xor_aggregate(8), inputs, seed=0)
    sides = [frozenset({0}), frozenset({0, 1}), frozenset({0, 1, 2})]
    total = sum(cut_projection(tr, P4, Cut(4, s)) for s in sides)
    assert total == tr.total


def test_cut_projection_no_traffic():
    g = path_graph(3)
    groups = GroupedTerminals(((0, 1),))
    inputs = assign(4, 1, 2, groups=groups)
    tr = run(g, groups, protocol_xor_aggregate(4), inputs, seed=0)
    assert cut_projection(tr, g, Cut(3, frozenset({0, 1}))) == 0


def test_measured_feasibility_xor_vs_lp_st():
    rep = measured_vector_feasibility(
        P4,
        PAIR,
        protocol_xor_aggregate(8),
        lambda s: dist_uniform_iid(PAIR, 8, seed=s),
        4,
        spec_steiner([[0, 3]]),
        8.0,
    )
    assert rep.feasible
    assert rep.checked_cuts == 4  # cuts separating {0, 3}


def test_measured_feasibility_zero_protocol_violates():
    g = path_graph(2)
    groups = GroupedTerminals(((0, 0),))
    rep = measured_vector_feasibility(
        g,
        groups,
        protocol_xor_aggregate(4),
        lambda s: dist_uniform_iid(groups, 4, seed=s),
        3,
        spec_steiner([[0, 1]]),
        4.0,
    )
    assert not rep.feasible
    assert len(rep.violations) == 1  # the single separating cut is listed


def test_trace_json_round_trip():
    inputs = assign(4, 3, 9)
    tr = run(P4, PAIR, protocol_xor_aggregate(4), inputs, seed=2)
    obj = tr.to_json(P4)
    assert obj["total"] == tr.total == sum(
        e["bits_uv"] + e["bits_vu"] for e in obj["edges"]
    )
    back = InputAssignment.from_json(inputs.to_json())
    assert back == inputs
