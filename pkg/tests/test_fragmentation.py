"""
Tests for diamond planting, piece cutting, smoothing and reconstruction
"""

import math

import numpy as np
import pytest

from src.core.exceptions import DecodeError, InfeasibleSizeError, ParameterError, SmoothingRefusedError
from src.fragmentation.diamonds import day0_parameters, default_w, near_equal_gaps, plant_diamonds
from src.fragmentation.matching import cycle_edges, diamond_edges, matching_rule, relocate, smooth
from src.fragmentation.pieces import (
    closed_runs,
    cut_pieces,
    diamond_free_stretches,
    path_square_edges,
    run_histogram,
)
from src.fragmentation.reconstruction import (
    PreimageCount,
    ReconstructionContext,
    count_preimages,
    decode_preimage,
    encode_preimage,
    preimage_audit,
)
from src.models.fragment import DiamondLayout, Embedding
from src.models.graph import Graph

N = 40
MU = 3
THRESHOLD = 7


@pytest.fixture
def layout() -> DiamondLayout:
    return DiamondLayout(n=N, chi=2, diamonds=[(0, 1, 2, 3), (20, 21, 22, 23)], gaps=[16, 16], starts=[0, 20])


@pytest.fixture
def planted(square_spec) -> Embedding:
    return Embedding(family=square_spec, perm=tuple(range(N)))


@pytest.fixture
def fragment_edges(layout):
    """One closed run on 5..14 plus both diamonds"""
    return path_square_edges(list(range(5, 15))) | set(layout.edges())


def test_day0_parameters_at_ten_thousand():
    params = day0_parameters(10_000)
    assert params.chi == 24
    assert params.mu == 165
    assert params.l0 == 400
    assert params.beta == pytest.approx(0.020905, rel=1e-3)
    assert params.cap == 520
    assert params.threshold == 169


def test_default_w_needs_n_at_least_three():
    with pytest.raises(ParameterError):
        default_w(2)


def test_near_equal_gaps():
    assert near_equal_gaps(50, 3) == [13, 13, 12]
    assert sum(near_equal_gaps(97, 5)) == 97 - 20


def test_planted_diamonds_are_contiguous():
    layout, F = plant_diamonds(50, 3, seed=8)
    order = list(F.perm)
    for start, diamond in zip(layout.starts, layout.diamonds):
        assert tuple(order[start:start + 4]) == diamond
    assert layout.root == order[0]
    assert set(layout.edges()) <= cycle_edges(order)


def test_plant_diamonds_rejects_crowded_layouts():
    with pytest.raises(ParameterError):
        plant_diamonds(10, 2, seed=0)
    with pytest.raises(ParameterError):
        plant_diamonds(10, 0, seed=0)


def test_layout_validation():
    with pytest.raises(ValueError):
        DiamondLayout(n=20, chi=2, diamonds=[(0, 1, 2, 3), (3, 4, 5, 6)], gaps=[6, 6], starts=[0, 10])
    with pytest.raises(ValueError):
        DiamondLayout(n=20, chi=2, diamonds=[(0, 1, 2, 3), (10, 11, 12, 13)], gaps=[8, 4], starts=[0, 12])


def test_closed_runs_of_a_path_square():
    order = list(range(12))
    edges = path_square_edges(list(range(6)))
    assert closed_runs(order, edges) == [(0, 6)]
    assert run_histogram(order, edges) == {6: 1}


def test_whole_cycle_is_one_run(square12):
    assert closed_runs(list(range(12)), set(square12.edge_set)) == [(0, 12)]


def test_diamond_free_stretches():
    assert diamond_free_stretches([1, 2, 3, 4, 5], {3}) == [[1, 2], [4, 5]]
    assert diamond_free_stretches([1, 2], {1, 2}) == []


def test_path_square_edges():
    assert path_square_edges([0, 1, 2, 3]) == {(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)}


def test_cut_pieces_from_one_stretch(layout, fragment_edges):
    cut = cut_pieces(fragment_edges, list(range(N)), MU, THRESHOLD, layout)
    assert cut.pieces == [[7, 8, 9], [10, 11, 12]]
    assert cut.removed == 6
    run = cut.runs[0]
    assert run.retained_head == [5, 6]
    assert run.retained_tail == [13, 14]
    assert run.glue == 6
    core = set(cut.core)
    assert {(5, 13), (6, 13), (6, 14)} <= core
    assert not any(v in range(7, 13) for e in core for v in e)
    assert set(layout.edges()) <= core


def test_cut_pieces_parameter_checks(fragment_edges):
    with pytest.raises(ParameterError):
        cut_pieces(fragment_edges, list(range(N)), 0, THRESHOLD)
    with pytest.raises(ParameterError):
        cut_pieces(fragment_edges, list(range(N)), MU, MU + 3)


def test_matching_rule_density():
    assert all(row == [] for row in matching_rule(3, 50, 0.0, seed=1).adjacency)
    full = matching_rule(3, 50, 1.0, seed=1)
    assert full.degrees() == [50, 50, 50]
    assert full.allows(2, 49)
    assert matching_rule(3, 50, 0.3, seed=5) == matching_rule(3, 50, 0.3, seed=5)
    with pytest.raises(ParameterError):
        matching_rule(3, 50, 1.5, seed=1)


def test_diamond_edges_skip_outer_pair():
    assert diamond_edges((4, 5, 6, 7)) == [(4, 5), (4, 6), (5, 6), (5, 7), (6, 7)]


def test_relocate_inserts_between_middle_vertices():
    order = list(range(12))
    moved = relocate(order, [([9, 10], (2, 3, 4, 5))])
    assert moved == [0, 1, 2, 3, 9, 10, 4, 5, 6, 7, 8, 11]


def test_smoothing_conserves_summary(layout, planted, fragment_edges):
    cut = cut_pieces(fragment_edges, planted.perm, MU, THRESHOLD, layout)
    rule = matching_rule(2, N, 1.0, seed=0)
    result = smooth(cut, layout, rule, planted, planted.perm)
    smoothed = set(result.smoothed)
    assert Graph.trusted(N, smoothed).summary() == Graph.trusted(N, fragment_edges).summary()
    assert sorted(r.diamond for r in result.relocations) == [0, 1]
    assert result.eligible == [0, 1]
    assert result.conserved
    assert result.violations == []
    assert smoothed <= cycle_edges(result.order)
    assert result.witness.perm[0] == 0


def test_smoothing_without_pieces_is_identity(layout, planted):
    H = set(layout.edges())
    cut = cut_pieces(H, planted.perm, MU, THRESHOLD, layout)
    result = smooth(cut, layout, matching_rule(2, N, 1.0, seed=0), planted, planted.perm)
    assert set(result.smoothed) == H
    assert result.order == list(planted.perm)
    assert result.relocations == []


def test_smoothing_refused_without_matching(layout, planted, fragment_edges):
    cut = cut_pieces(fragment_edges, planted.perm, MU, THRESHOLD, layout)
    with pytest.raises(SmoothingRefusedError):
        smooth(cut, layout, matching_rule(2, N, 0.0, seed=0), planted, planted.perm)


def test_smoothing_refused_when_a_diamond_is_missing(layout, planted):
    H = path_square_edges(list(range(5, 15))) | set(diamond_edges(layout.diamonds[0]))
    cut = cut_pieces(H, planted.perm, MU, THRESHOLD, layout)
    with pytest.raises(SmoothingRefusedError):
        smooth(cut, layout, matching_rule(2, N, 1.0, seed=0), planted, planted.perm)


def test_reconstruction_recovers_planted_copy(layout, planted, fragment_edges):
    rule = matching_rule(2, N, 1.0, seed=0)
    cut = cut_pieces(fragment_edges, planted.perm, MU, THRESHOLD, layout)
    result = smooth(cut, layout, rule, planted, planted.perm)
    context = ReconstructionContext(n=N, S=tuple(result.smoothed), layout=layout, rule=rule, mu=MU)
    x = encode_preimage(planted, result, context)
    assert x.A_prime == (6,)
    assert x.f == (6,)
    assert sorted(x.tau2) == [0, 1]
    assert decode_preimage(x, context) == planted


def test_decoding_rejects_bad_composition(layout, planted, fragment_edges):
    rule = matching_rule(2, N, 1.0, seed=0)
    cut = cut_pieces(fragment_edges, planted.perm, MU, THRESHOLD, layout)
    result = smooth(cut, layout, rule, planted, planted.perm)
    context = ReconstructionContext(n=N, S=tuple(result.smoothed), layout=layout, rule=rule, mu=MU)
    x = encode_preimage(planted, result, context)
    with pytest.raises(DecodeError):
        decode_preimage(x.model_copy(update={"f": (5,)}), context)
    with pytest.raises(DecodeError):
        decode_preimage(x.model_copy(update={"rho": (0, 0)}), context)


def test_decoding_checks_the_matching_rule(layout, planted, fragment_edges):
    rule = matching_rule(2, N, 1.0, seed=0)
    cut = cut_pieces(fragment_edges, planted.perm, MU, THRESHOLD, layout)
    result = smooth(cut, layout, rule, planted, planted.perm)
    strict = matching_rule(2, N, 0.0, seed=0)
    context = ReconstructionContext(n=N, S=tuple(result.smoothed), layout=layout, rule=strict, mu=MU)
    x = encode_preimage(planted, result, context)
    with pytest.raises(DecodeError):
        decode_preimage(x, context)


def _reconstruction(layout, planted, fragment_edges):
    rule = matching_rule(2, N, 1.0, seed=0)
    cut = cut_pieces(fragment_edges, planted.perm, MU, THRESHOLD, layout)
    result = smooth(cut, layout, rule, planted, planted.perm)
    context = ReconstructionContext(n=N, S=tuple(result.smoothed), layout=layout, rule=rule, mu=MU)
    return encode_preimage(planted, result, context), context


def test_encoding_orders_every_component(layout, planted, fragment_edges):
    x, context = _reconstruction(layout, planted, fragment_edges)
    components = Graph.trusted(N, set(context.S)).components()
    touched = {v for c in components for v in c}
    assert sorted(x.pi) == list(range(len(components) + N - len(touched)))
    anchors = [anchor for anchor, _ in x.alpha]
    assert [sum(1 for a in anchors if a in c) for c in components] == [1] * len(components)
    assert 20 in anchors
    assert x.pi[0] == 0


def test_component_order_changes_the_decoded_copy(layout, planted, fragment_edges):
    x, context = _reconstruction(layout, planted, fragment_edges)
    pi = list(x.pi)
    pi[-2], pi[-1] = pi[-1], pi[-2]
    decoded = decode_preimage(x.model_copy(update={"pi": tuple(pi)}), context)
    assert decoded.perm == tuple(range(38)) + (39, 38)


def test_decoding_rejects_a_non_leftmost_anchor(layout, planted, fragment_edges):
    x, context = _reconstruction(layout, planted, fragment_edges)
    with pytest.raises(DecodeError):
        decode_preimage(x.model_copy(update={"pi": tuple(reversed(x.pi))}), context)
    with pytest.raises(DecodeError):
        decode_preimage(x.model_copy(update={"alpha": x.alpha[1:]}), context)


def test_decoding_checks_diamond_slots(square_spec):
    layout = DiamondLayout(n=8, chi=1, diamonds=[(0, 1, 2, 3)], gaps=[4], starts=[0])
    planted = Embedding(family=square_spec, perm=tuple(range(8)))
    rule = matching_rule(1, 8, 1.0, seed=0)
    H = set(layout.edges())
    result = smooth(cut_pieces(H, planted.perm, MU, THRESHOLD, layout), layout, rule, planted, planted.perm)
    context = ReconstructionContext(n=8, S=tuple(sorted(H)), layout=layout, rule=rule, mu=MU)
    x = encode_preimage(planted, result, context)
    assert x.alpha == ((0, (2, 3, 3)),)
    with pytest.raises(DecodeError):
        decode_preimage(x.model_copy(update={"alpha": ((0, (2, 3, 0)),)}), context)


def test_diamond_only_fragment_has_one_preimage_per_order(square_spec):
    layout = DiamondLayout(n=8, chi=1, diamonds=[(0, 1, 2, 3)], gaps=[4], starts=[0])
    planted = Embedding(family=square_spec, perm=tuple(range(8)))
    rule = matching_rule(1, 8, 1.0, seed=0)
    H = set(layout.edges())
    result = smooth(cut_pieces(H, planted.perm, MU, THRESHOLD, layout), layout, rule, planted, planted.perm)
    context = ReconstructionContext(n=8, S=tuple(sorted(H)), layout=layout, rule=rule, mu=MU)
    count = count_preimages(encode_preimage(planted, result, context), context, l_chi=10)
    assert (count.l, count.x, count.c) == (5, 4, 1)
    assert count.tuples == 24
    assert count.copies == 24
    assert math.log(count.copies) <= count.log_bound


def test_preimage_count_after_smoothing(square_spec):
    layout = DiamondLayout(n=12, chi=1, diamonds=[(0, 1, 2, 3)], gaps=[8], starts=[0])
    planted = Embedding(family=square_spec, perm=tuple(range(12)))
    rule = matching_rule(1, 12, 1.0, seed=0)
    H = path_square_edges(list(range(5, 11))) | set(layout.edges())
    cut = cut_pieces(H, planted.perm, 2, 6, layout)
    assert len(cut.pieces) == 1
    result = smooth(cut, layout, rule, planted, planted.perm)
    context = ReconstructionContext(n=12, S=tuple(sorted(result.smoothed)), layout=layout, rule=rule, mu=2)
    x = encode_preimage(planted, result, context)
    assert decode_preimage(x, context) == planted
    count = count_preimages(x, context, l_chi=12)
    assert count.copies >= 1
    assert count.copies <= count.tuples <= count.candidates
    assert math.log(count.copies) <= count.log_bound


def test_preimage_count_refuses_large_candidate_sets(layout, planted, fragment_edges):
    x, context = _reconstruction(layout, planted, fragment_edges)
    with pytest.raises(InfeasibleSizeError):
        count_preimages(x, context, l_chi=12, limit=1000)


def test_preimage_audit_compares_counts_with_bounds():
    inside = PreimageCount(l=5, x=4, c=1, candidates=100, tuples=24, copies=24, log_bound=20.0, log_small=2.0)
    outside = PreimageCount(l=5, x=4, c=1, candidates=100, tuples=30, copies=30, log_bound=1.0, log_small=1.0)
    audit = preimage_audit([inside, outside], skipped=3)
    assert audit.groups == 2
    assert audit.skipped == 3
    assert audit.max_count == 30
    assert audit.large_violations == 1
    assert audit.small_exceedances == 2
    assert [row["count"] for row in audit.rows] == [24, 30]


@pytest.mark.slow
def test_reconstruction_round_trips_over_seeds():
    for seed in range(1000):
        layout, F = plant_diamonds(N, 2, seed)
        rng = np.random.default_rng(seed)
        start = int(rng.integers(5, 9))
        length = int(rng.integers(7, 13))
        p = int(rng.integers(25, 37))
        order = F.perm
        H = (
            set(layout.edges())
            | path_square_edges(list(order[start:start + length]))
            | path_square_edges(list(order[p:p + 3]))
        )
        rule = matching_rule(2, N, 1.0, seed=seed)
        cut = cut_pieces(H, order, MU, THRESHOLD, layout)
        result = smooth(cut, layout, rule, F, order)
        context = ReconstructionContext(n=N, S=tuple(sorted(result.smoothed)), layout=layout, rule=rule, mu=MU)
        assert decode_preimage(encode_preimage(F, result, context), context) == F, seed
