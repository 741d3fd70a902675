"""Topology-sensitive communication bounds on graphs.

Cut-covering LPs and their named specializations, ball-growing multicut
families, spanning-subtree embeddings with measured stretch, and a
bit-exact message-passing protocol simulator, all over unit-weight
connected graphs with grouped terminals.
"""

from .cuts import (
    BValueSpec,
    Cut,
    Multicut,
    b_grouped,
    b_match,
    b_mdn,
    b_steiner,
    bourgain_cut_collection,
    check_subadditive,
    crossing_edges,
    enumerate_cuts,
    spec_custom,
    spec_grouped,
    spec_match,
    spec_mdn,
    spec_steiner,
    verify_separation,
)
from .embedding import (
    best_subtree,
    max_stretch_exact,
    sample_subtree,
    stretch,
    transfer_solution,
    tree_path,
    verify_transfer,
)
from .errors import (
    AlphabetTooSmall,
    BudgetExceeded,
    DisconnectedGraph,
    EmptySet,
    EmptyTerminalSet,
    Infeasible,
    InstanceTooLarge,
    IterationLimit,
    MissingMatchings,
    NotATree,
    NotSpanning,
    OddTerminalCount,
    OverlappingPairs,
    ParseError,
    ShapeMismatch,
    TooFewTerminals,
    TopocommError,
)
from .graph import (
    Graph,
    GroupedTerminals,
    SteinerTree,
    cycle_graph,
    grid_graph,
    load_graph_file,
    matching_distance,
    metric_closure,
    parse_graph_text,
    path_graph,
    random_connected_graph,
    random_tree,
    shortest_path_matrix,
    sigma,
    sigma_grouped,
    star_graph,
    steiner_tree_approx,
    steiner_tree_exact,
    worst_case_matching,
)
from .lp import (
    LPInstance,
    LPSolution,
    build_lower_lp,
    build_upper_lp,
    dump_lp_text,
    gap_report,
    lp_mdn,
    lp_mtch,
    lp_st,
    solve,
    tree_closed_form,
    upper_lp_by_routing,
)
from .multicut import (
    MulticutFamily,
    ball,
    boruvka_threshold_partition,
    build_multicuts,
    build_partition_sequence,
    chunk_into_family,
    ell_bound,
    family_cost_check,
    verify_family,
)
from .protocols import (
    InputAssignment,
    Protocol,
    ProtocolTrace,
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
from .distributions import (
    dist_disj_multicut,
    dist_distinct,
    dist_ed_xor_two_party,
    dist_udisj,
    dist_uniform_iid,
    dist_xor_ed,
)

__version__ = "0.1.0"
