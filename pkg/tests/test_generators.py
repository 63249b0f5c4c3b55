"""
Tests for family constructions and random graph generators
"""

import pytest

from src.core.exceptions import ParameterError, RetryExhaustedError
from src.generators.families import build_family, cyclic_order_graph, invert, relabel
from src.generators.random_graphs import RandomGraphGenerator, SharedWeights, random_regular
from src.models.graph import FamilySpec, Graph, pair_count


def test_square_of_c8(square8):
    assert square8.num_edges == 16
    assert square8.is_regular(4)
    assert square8.adjacency[0] == frozenset({1, 2, 6, 7})


def test_square_of_cycle_rejects_small_n(square_spec):
    with pytest.raises(ParameterError):
        build_family(square_spec, 4)


def test_square_of_c5_is_complete(square_spec):
    assert build_family(square_spec, 5).num_edges == 10


def test_overlapping_four_cycles():
    F = build_family(FamilySpec.parse("overlapping_four_cycles"), 8)
    assert F.num_edges == 12
    assert F.is_regular(3)


@pytest.mark.parametrize("text,n,d", [
    ("toroidal_grid:3", 9, 4),
    ("toroidal_grid:3", 12, 4),
    ("square_lattice", 16, 4),
    ("triangular_lattice", 16, 6),
    ("power_of_cycle:3", 11, 6),
])
def test_families_are_regular(text, n, d):
    F = build_family(FamilySpec.parse(text), n)
    assert F.is_regular(d)
    assert sum(F.degrees()) == 2 * F.num_edges
    assert build_family(FamilySpec.parse(text), n) == F


def test_random_regular_small_cases():
    assert random_regular(4, 3, seed=1).num_edges == 6
    cycles = random_regular(6, 2, seed=3)
    assert cycles.degrees() == [2] * 6


def test_random_regular_is_seeded():
    a = random_regular(24, 4, seed=7)
    assert a.degrees() == [4] * 24
    assert random_regular(24, 4, seed=7) == a


def test_random_regular_rejects_odd_degree_sum():
    with pytest.raises(ParameterError):
        random_regular(7, 3, seed=0)


def test_relabel_identity_and_rotation(square8):
    assert relabel(square8, list(range(8))).edge_set == square8.edge_set
    rotation = [(v + 1) % 8 for v in range(8)]
    assert relabel(square8, rotation).edge_set == square8.edge_set


def test_relabel_transposition_on_path():
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert relabel(path, [1, 0, 2]).edge_set == {(0, 1), (0, 2)}


def test_relabel_round_trip(square10):
    perm = [3, 7, 1, 0, 9, 2, 8, 4, 6, 5]
    assert relabel(relabel(square10, perm), invert(perm)).edge_set == square10.edge_set


def test_relabel_rejects_non_bijection(square8):
    with pytest.raises(ParameterError):
        relabel(square8, [0] * 8)


def test_cyclic_order_graph_matches_family(square8):
    assert cyclic_order_graph(range(8), 2).edge_set == square8.edge_set


def test_gnm_counts_and_forbidden():
    generator = RandomGraphGenerator(seed=5)
    forbidden = [(0, 1), (2, 3)]
    G = generator.gnm(10, 30, forbidden=forbidden)
    assert G.num_edges == 30
    assert not (G.edge_set & set(forbidden))
    assert RandomGraphGenerator(seed=5).gnm(10, 30, forbidden=forbidden) == G


def test_gnm_rejects_impossible_m():
    with pytest.raises(ParameterError):
        RandomGraphGenerator(0).gnm(5, pair_count(5) + 1)


def test_gnm_rejecting_gives_up():
    generator = RandomGraphGenerator(0)
    with pytest.raises(RetryExhaustedError):
        generator.gnm_rejecting(5, pair_count(5), forbidden=[(0, 1)], max_attempts=3)
    assert generator.rejections == 3


def test_gnp_extremes():
    generator = RandomGraphGenerator(2)
    assert generator.gnp(6, 0.0).num_edges == 0
    assert generator.gnp(6, 1.0).num_edges == 15
    with pytest.raises(ParameterError):
        generator.gnp(6, 1.5)


def test_shared_weights_are_monotone():
    weights = SharedWeights(12, seed=4)
    low, high = weights.graph_at(0.3), weights.graph_at(0.6)
    assert low.edge_set <= high.edge_set
    assert weights.graph_at(1.0).num_edges == pair_count(12)
    assert weights.graph_at(0.0).num_edges == 0
