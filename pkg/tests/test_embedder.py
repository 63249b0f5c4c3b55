"""
Tests for spanning-copy search, anchored search and the fragment sampler
"""

import pytest

from src.core.exceptions import ParameterError
from src.generators.families import build_family, cyclic_order_graph
from src.generators.random_graphs import RandomGraphGenerator
from src.models.fragment import Embedding, SearchStatus
from src.models.graph import FamilySpec, Graph
from src.search.embedder import (
    FragmentParams,
    anchored_copy_search,
    embedding_graph,
    enumerate_copies,
    find_spanning_copy,
    sample_fragment,
)


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def identity(spec: FamilySpec, n: int) -> Embedding:
    return Embedding(family=spec, perm=tuple(range(n)))


def test_finds_copy_in_itself(square10, square_spec):
    result = find_spanning_copy(square10, square_spec, seed=3)
    assert result.status == SearchStatus.FOUND
    assert embedding_graph(result.embedding).issubgraph(square10)
    assert result.nodes_visited > 0


def test_bipartite_host_has_no_square(square_spec):
    host = Graph.from_edges(10, [(u, v) for u in range(5) for v in range(5, 10)])
    result = find_spanning_copy(host, square_spec)
    assert result.status == SearchStatus.NONE


def test_too_few_edges_short_circuits(square_spec):
    host = cyclic_order_graph(list(range(10)), k=1)
    result = find_spanning_copy(host, square_spec)
    assert result.status == SearchStatus.NONE
    assert result.nodes_visited == 0


def test_tiny_budget_is_inconclusive(square_spec):
    host = Graph.from_edges(10, [(u, v) for u in range(5) for v in range(5, 10)])
    result = find_spanning_copy(host, square_spec, budget=1)
    assert result.status == SearchStatus.INCONCLUSIVE


def test_result_dict_layout(square8, square_spec):
    payload = find_spanning_copy(square8, square_spec).to_dict()
    assert set(payload) == {"result", "embedding", "nodes_visited"}
    assert payload["result"] == "found"
    assert sorted(payload["embedding"]) == list(range(8))


def test_enumerate_copies_counts_members(square8, square_spec):
    assert len(enumerate_copies(square8, square_spec)) == 1
    assert len(enumerate_copies(complete_graph(8), square_spec)) == 2520


def test_exact_anchored_search_without_sprinkle_is_trivial(square_spec):
    F = identity(square_spec, 8)
    fragment = anchored_copy_search(F, Graph(n=8), exact=True)
    assert fragment.trivial
    assert fragment.size == 16
    assert fragment.candidates == 1


def test_exact_anchored_search_escapes_planted_copy(square_spec):
    F = identity(square_spec, 8)
    fragment = anchored_copy_search(F, complete_graph(8), exact=True)
    assert fragment.size < 16
    assert not fragment.trivial
    assert set(fragment.edges) <= embedding_graph(F).edge_set


def test_exact_mode_is_size_limited(square_spec):
    F = identity(square_spec, 14)
    with pytest.raises(ParameterError):
        anchored_copy_search(F, Graph(n=14), exact=True)


def test_heuristic_search_moves_inside_complete_host(square_spec):
    F = identity(square_spec, 20)
    fragment = anchored_copy_search(F, complete_graph(20), seed=1)
    assert not fragment.trivial
    assert fragment.size < 40
    assert set(fragment.edges) <= embedding_graph(F).edge_set
    assert embedding_graph(fragment.found).issubgraph(complete_graph(20))


def test_heuristic_fragment_lies_in_planted_copy(square_spec):
    n = 30
    F = identity(square_spec, n)
    W = RandomGraphGenerator(5).gnm(n, 120)
    fragment = anchored_copy_search(F, W, "sample", seed=2)
    host = embedding_graph(F).union(W)
    assert set(fragment.edges) <= embedding_graph(F).edge_set
    assert embedding_graph(fragment.found).issubgraph(host)
    assert fragment.found.perm[0] == F.perm[0]


def test_heuristic_search_keeps_grounded_positions(square_spec):
    F = identity(square_spec, 30)
    grounded = [(0, 1, 2, 3), (15, 16, 17, 18)]
    fragment = anchored_copy_search(F, complete_graph(30), seed=1, grounded=grounded)
    assert not fragment.trivial
    assert all(fragment.found.perm[v] == v for diamond in grounded for v in diamond)


def test_exact_search_keeps_grounded_positions(square_spec):
    F = identity(square_spec, 8)
    fragment = anchored_copy_search(F, complete_graph(8), exact=True, grounded=[(0, 1, 2, 3)])
    assert fragment.found.perm[:4] == (0, 1, 2, 3)
    assert fragment.size < 16


def test_heuristic_search_needs_power_of_cycle():
    spec = FamilySpec.parse("toroidal_grid:4")
    F = identity(spec, 16)
    with pytest.raises(ParameterError):
        anchored_copy_search(F, Graph(n=16))


def test_unknown_objective(square_spec):
    with pytest.raises(ParameterError):
        anchored_copy_search(identity(square_spec, 8), Graph(n=8), "maximize")


def test_sampler_returns_first_draw_without_long_runs(square_spec):
    n = 30
    F = identity(square_spec, n)
    W = RandomGraphGenerator(9).gnm(n, 100)
    params = FragmentParams(l0=10, chi=2, length_threshold=n + 1, enforce_cap=False)
    fragment = sample_fragment(F, W, params, seed=4)
    assert fragment.rounds == 1
    assert fragment.candidates == 1
    assert fragment.separated
    assert set(fragment.edges) <= embedding_graph(F).edge_set


def test_sampler_is_reproducible(square_spec):
    n = 30
    F = identity(square_spec, n)
    W = RandomGraphGenerator(9).gnm(n, 100)
    params = FragmentParams(l0=10, chi=2, length_threshold=8, enforce_cap=False)
    first = sample_fragment(F, W, params, seed=11)
    second = sample_fragment(F, W, params, seed=11)
    assert first.edges == second.edges
    assert first.found == second.found


def test_sampler_keeps_grounded_positions(square_spec):
    n = 30
    F = identity(square_spec, n)
    W = RandomGraphGenerator(9).gnm(n, 100)
    params = FragmentParams(l0=10, chi=2, length_threshold=8, enforce_cap=False)
    grounded = [(0, 1, 2, 3), (15, 16, 17, 18)]
    fragment = sample_fragment(F, W, params, seed=11, grounded=grounded)
    assert fragment.grounded[:2] == grounded
    for diamond in fragment.grounded:
        assert all(fragment.found.perm[v] == v for v in diamond)


def test_sampler_round_cap_must_be_positive(square_spec):
    params = FragmentParams(l0=4, chi=1, round_cap=0, length_threshold=8)
    with pytest.raises(ParameterError):
        sample_fragment(identity(square_spec, 12), Graph(n=12), params)


def test_square_family_builder_matches_identity_embedding(square_spec):
    assert embedding_graph(identity(square_spec, 12)).edge_set == build_family(square_spec, 12).edge_set
