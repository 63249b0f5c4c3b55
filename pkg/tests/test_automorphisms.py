"""
Tests for automorphism counting
"""

import pytest

from src.analysis.automorphisms import automorphism_count, is_automorphism, is_vertex_transitive
from src.core.exceptions import InfeasibleSizeError
from src.generators.families import build_family, relabel
from src.models.graph import FamilySpec, Graph


def test_square_of_c8(square8):
    assert automorphism_count(square8) == 16


def test_complete_graphs(square_spec):
    K4 = Graph.from_edges(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    assert automorphism_count(K4) == 24
    assert automorphism_count(build_family(square_spec, 5)) == 120


def test_invariant_under_relabeling(square10):
    perm = [4, 0, 8, 1, 9, 3, 7, 2, 6, 5]
    assert automorphism_count(relabel(square10, perm)) == automorphism_count(square10)


def test_rotation_is_automorphism(square8):
    assert is_automorphism(square8, [(v + 1) % 8 for v in range(8)])
    assert is_vertex_transitive(square8)


def test_shortcut_above_limit(square_spec):
    F = build_family(square_spec, 20)
    assert automorphism_count(F, spec=square_spec) == 40
    with pytest.raises(InfeasibleSizeError):
        automorphism_count(F)


def test_shortcut_agrees_with_brute_force_at_limit(square_spec):
    F = build_family(square_spec, 12)
    assert automorphism_count(F) == 24


def test_toroidal_grid_shortcut_agrees():
    spec = FamilySpec.parse("toroidal_grid:3")
    F = build_family(spec, 12)
    assert automorphism_count(F) == 4 * 3 * 4
