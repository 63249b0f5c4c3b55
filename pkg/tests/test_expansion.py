"""
Tests for boundary certification and closed-subgraph enumeration
"""

from collections import Counter

import pytest
from pydantic import ValidationError

from src.analysis import expansion
from src.analysis.expansion import (
    boundary_fixing_automorphisms,
    check_cyclic_shift,
    check_local_sparsity,
    classify_conditions,
    component_automorphism_audit,
    edge_boundary,
    enumerate_closed_subgraphs,
    verify_closed_claims,
)
from src.core.exceptions import ParameterError
from src.models.analytics import ConditionId, ConditionVerdict
from src.models.census import delta_level


def test_diamond_boundary(square8):
    assert edge_boundary(square8, {0, 1, 2, 3}) == 6
    assert edge_boundary(square8, range(8)) == 0
    assert edge_boundary(square8, []) == 0


def test_delta_level_is_shared_with_the_census_models():
    assert delta_level(3) == 4
    assert delta_level(4) == 6
    assert expansion.delta_level is delta_level


def test_closed_subgraphs_of_square_c10_are_windows(square10):
    closed = enumerate_closed_subgraphs(square10, 6)
    sizes = Counter(len(S) for S in closed)
    assert sizes == {3: 10, 4: 10, 5: 10, 6: 10}
    windows = {frozenset((s + a) % 10 for a in range(v)) for v in range(3, 7) for s in range(10)}
    assert set(closed) == windows


def test_closed_enumeration_range_checked(square10):
    with pytest.raises(ParameterError):
        enumerate_closed_subgraphs(square10, 8)


def test_square_c12_satisfies_d_plus_one(square12):
    verdict = check_local_sparsity(square12, "d+1", (3, 9))
    assert verdict.holds
    assert verdict.stats["min_boundary"] == 6


def test_square_c12_fails_double_degree(square12):
    verdict = check_local_sparsity(square12, "2d", (3, 9))
    assert not verdict.holds
    assert edge_boundary(square12, verdict.witness) < 8


def test_triangle_violates_d_plus_one_in_cubic_graph(prism):
    verdict = check_local_sparsity(prism, "d+1", (3, 3))
    assert not verdict.holds
    assert verdict.witness in ([0, 1, 2], [3, 4, 5])
    assert verdict.stats["boundary"] == 3


def test_empty_range_is_vacuous(square12):
    verdict = check_local_sparsity(square12, "d+1", (3, 2))
    assert verdict.holds and verdict.vacuous


def test_growing_rule_needs_parameters(square12):
    with pytest.raises(ParameterError):
        check_local_sparsity(square12, "growing", (3, 5))


def test_tiny_budget_is_inconclusive(square12):
    verdict = check_local_sparsity(square12, "d+1", (3, 9), budget=5)
    assert verdict.inconclusive


def test_closed_claims_on_square_c10(square10):
    report = verify_closed_claims(square10, 6)
    assert report.passed
    assert report.min_degree_observed == 2
    assert report.max_pair_count == 2
    assert report.closed_counts == {3: 10, 4: 10, 5: 10, 6: 10}


def test_classification_of_square_c12(square12):
    verdicts = {v.condition: v for v in classify_conditions(square12)}
    assert verdicts[ConditionId.LOCAL_EXPANSION].vacuous
    assert not verdicts[ConditionId.DOUBLE_DEGREE].holds


def test_holding_verdict_cannot_carry_witness():
    with pytest.raises(ValidationError):
        ConditionVerdict(condition=ConditionId.LOCAL_SPARSITY, holds=True, witness=[0, 1, 2])


def test_square_of_cycle_is_a_two_shift_family(square12):
    verdict = check_cyclic_shift(square12, 2)
    assert verdict.holds
    assert verdict.condition == ConditionId.CYCLIC_SHIFT


def test_one_shift_fails_on_bandwidth(square12):
    verdict = check_cyclic_shift(square12, 1)
    assert not verdict.holds
    assert verdict.stats["part"] == "bandwidth"


def test_boundary_fixing_automorphisms(square12):
    assert boundary_fixing_automorphisms(square12, range(12)) == 24
    assert boundary_fixing_automorphisms(square12, range(5)) == 1


def test_component_automorphism_audit(square8):
    audit = component_automorphism_audit(square8, 3)
    assert audit["checked"] > 0
    assert audit["violations"] == []
    assert 0 < audit["worst_ratio"] <= 1
