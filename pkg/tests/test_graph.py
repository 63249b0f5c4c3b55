"""
Tests for the graph and family-spec models
"""

import pytest

from src.core.exceptions import ParameterError
from src.models.graph import FamilyKind, FamilySpec, Graph, pair_count


def test_edges_are_normalized_and_sorted():
    g = Graph.from_edges(4, [(3, 1), (0, 2), (1, 0)])
    assert g.edges == ((0, 1), (0, 2), (1, 3))
    assert g.num_edges == 3


@pytest.mark.parametrize("edges", [[(1, 1)], [(0, 1), (1, 0)], [(0, 4)]])
def test_invalid_edges_rejected(edges):
    with pytest.raises(ParameterError):
        Graph.from_edges(4, edges)


def test_regularity_tag_enforced():
    with pytest.raises(ParameterError):
        Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], d=2)
    cycle = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)], d=2)
    assert cycle.is_regular(2)


def test_set_operations_and_components():
    a = Graph.from_edges(6, [(0, 1), (1, 2), (4, 5)])
    b = Graph.from_edges(6, [(1, 2), (2, 3)])
    assert a.union(b).num_edges == 4
    assert a.intersection(b).edges == ((1, 2),)
    assert a.difference(b).edges == ((0, 1), (4, 5))
    assert a.components() == [[0, 1, 2], [4, 5]]
    assert a.summary() == {"l": 3, "x": 5, "c": 2}


def test_union_requires_same_vertex_count():
    with pytest.raises(ParameterError):
        Graph.from_edges(3, [(0, 1)]).union(Graph.from_edges(4, [(0, 1)]))


def test_diamond_summary(square8):
    diamond = Graph.trusted(8, square8.edges_within([0, 1, 2, 3]))
    assert diamond.summary() == {"l": 5, "x": 4, "c": 1}


def test_pair_count():
    assert pair_count(10) == 45
    assert pair_count(1) == 0


@pytest.mark.parametrize("text,kind,k", [
    ("sq_cycle", FamilyKind.POWER_OF_CYCLE, 2),
    ("ham_cycle", FamilyKind.POWER_OF_CYCLE, 1),
    ("power_of_cycle:3", FamilyKind.POWER_OF_CYCLE, 3),
])
def test_parse_power_of_cycle(text, kind, k):
    spec = FamilySpec.parse(text)
    assert spec.kind == kind
    assert spec.k == k
    assert spec.degree == 2 * k
    assert FamilySpec.parse(spec.label) == spec


def test_parse_other_families():
    assert FamilySpec.parse("toroidal_grid:3").degree == 4
    assert FamilySpec.parse("triangular_lattice").degree == 6
    assert FamilySpec.parse("overlapping_four_cycles").degree == 3
    rr = FamilySpec.parse("random_regular:4:7")
    assert (rr.d, rr.seed) == (4, 7)


@pytest.mark.parametrize("text", ["cube", "power_of_cycle", "power_of_cycle:x", "power_of_cycle:0"])
def test_parse_rejects_bad_specs(text):
    with pytest.raises(ParameterError):
        FamilySpec.parse(text)


def test_check_names_violated_constraint():
    with pytest.raises(ParameterError, match="2k\\+1"):
        FamilySpec.square_of_cycle().check(4)
    with pytest.raises(ParameterError, match="m_rows"):
        FamilySpec.parse("toroidal_grid:3").check(10)
    with pytest.raises(ParameterError, match="even"):
        FamilySpec.parse("overlapping_four_cycles").check(9)
    with pytest.raises(ParameterError, match="even"):
        FamilySpec.parse("random_regular:3").check(7)
