"""
Tests for the subgraph census, extension counts and the expectation threshold
"""

import math
from fractions import Fraction
from itertools import combinations

import pytest

from src.analysis.automorphisms import automorphism_count
from src.analysis.census import (
    CopyUniverse,
    census,
    count_extensions,
    count_monomorphisms,
    excess,
    expectation_threshold,
    extension_profile,
    log_copies,
    powerset_codes,
    powerset_table,
    spread_profile,
)
from src.core.exceptions import InfeasibleSizeError, ParameterError
from src.generators.families import build_family
from src.models.census import CensusKey
from src.models.graph import Graph


@pytest.mark.parametrize("key,sigma", [((5, 4, 1), 0), ((2, 4, 2), 0), ((4, 4, 1), 1)])
def test_excess(key, sigma):
    assert excess(4, CensusKey.of(key)) == Fraction(sigma)


def test_full_census_of_square_c10(square10):
    table = census(square10)
    assert table.total() == 2 ** 20 - 1
    assert table.count((1, 2, 1)) == 20
    assert table.complete


def test_diamond_bucket_matches_direct_count(square10):
    table = census(square10, l_max=5)
    # five edges on four vertices form K4 minus an edge, always connected
    direct = sum(math.comb(len(square10.edges_within(quad)), 5) for quad in combinations(range(10), 4))
    assert direct > 0
    assert table.count((5, 4, 1)) == direct


def test_growth_engine_agrees_with_powerset(square10):
    a = census(square10, l_max=4, engine="powerset")
    b = census(square10, l_max=4, engine="growth")
    assert a.counts == b.counts


def test_powerset_tables_of_disjoint_ranges_merge(square8):
    half = 1 << 15
    lower = powerset_table((square8, 0, half, 16))
    upper = powerset_table((square8, half, 1 << 16, 16))
    merged = lower.merge(upper)
    assert merged.counts == census(square8).counts
    assert merged.total() == 2 ** 16 - 1


def test_powerset_range_must_lie_in_the_subset_space(square8):
    with pytest.raises(ParameterError):
        powerset_codes(square8, 5, 3)
    with pytest.raises(ParameterError):
        powerset_codes(square8, 0, (1 << 16) + 1)


def test_census_csv_columns(square10):
    frame = census(square10, l_max=2).to_frame()
    assert list(frame.columns) == ["l", "x", "c", "sigma", "count"]


def test_extension_of_full_copy_is_one(square8, square_spec):
    assert count_extensions(square8, square_spec, 8) == 1


def test_extension_of_empty_graph_is_family_size(square8, square_spec):
    empty = Graph.trusted(8, [])
    assert count_extensions(empty, square_spec, 8) == math.factorial(8) // 16


def test_extension_identity_single_edge(square8, square_spec):
    edge = Graph.trusted(8, [(0, 1)])
    ext = count_extensions(edge, square_spec, 8)
    assert count_monomorphisms(edge, square8) == ext * automorphism_count(square8)
    universe = CopyUniverse.build(square8, square_spec, limit=8)
    assert universe.size == 2520
    assert universe.containing(edge) == ext


def test_extension_limit(square_spec):
    F = build_family(square_spec, 14)
    with pytest.raises(InfeasibleSizeError):
        count_extensions(Graph.trusted(14, [(0, 1)]), square_spec, 14, F=F)


def test_extension_profile_level_one(square8, square_spec):
    profile = extension_profile(square8, square_spec)
    assert profile.copies == 2520
    single = count_extensions(Graph.trusted(8, [(0, 1)]), square_spec, 8)
    assert profile.level_mass()[1] == 16 * single


@pytest.mark.parametrize("n,tolerance", [(50, 0.02), (200, 0.01)])
def test_expectation_threshold_near_sqrt_e_over_n(square_spec, n, tolerance):
    ratio = expectation_threshold(square_spec, n) / math.sqrt(math.e / n)
    assert abs(ratio - 1) < tolerance


def test_log_copies(square_spec):
    assert log_copies(square_spec, 8) == pytest.approx(math.log(2520))


def test_exhaustive_spread_of_square_c8(square_spec):
    report = spread_profile(square_spec, 8)
    assert report.copies == 2520
    assert report.examined == 2 ** 16 - 1
    assert report.worst_ratio == pytest.approx(16 / 28)
    assert report.per_level[16] == pytest.approx((1 / 2520) ** (1 / 16) * math.sqrt(8))


def test_sampled_spread_is_reproducible(square_spec):
    a = spread_profile(square_spec, 8, mode="sampled", trials=10, seed=3)
    b = spread_profile(square_spec, 8, mode="sampled", trials=10, seed=3)
    assert a == b
    assert a.worst_ratio <= 16 / 28 + 1e-12


def test_windowed_census_keeps_small_components(square10):
    windowed = census(square10, l_max=3, max_component_vertices=3)
    full = census(square10, l_max=3)
    assert windowed.count((1, 2, 1)) == 20
    assert windowed.count((3, 3, 1)) == full.count((3, 3, 1)) == 10
    assert all(x <= 3 * c for (_, x, c) in windowed.counts)
    assert windowed.count((3, 4, 1)) == 0
    with pytest.raises(ParameterError):
        census(square10, engine="powerset", max_component_vertices=3)
