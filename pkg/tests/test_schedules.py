"""
Tests for schedule constants, round plans and seeded schedule runs
"""

import pytest

from src.core.exceptions import ParameterError
from src.fragmentation.schedules import (
    coarse_edges,
    day0_edges,
    day1_edges,
    day2_edges,
    day2_round_count,
    day2_target,
    plan_rounds,
    run_schedule,
    sharp_base_edges,
)
from src.models.experiment import ExperimentConfig


def make_config(**overrides) -> ExperimentConfig:
    values = {"command": "fragment", "family": "sq_cycle", "n": 100, "seed": 1, "preset": "square_days"}
    values.update(overrides)
    return ExperimentConfig(**values)


def test_day_constants():
    assert day0_edges(100, 0.1) == 897
    assert day1_edges(100, 0.1) == 49
    assert day2_edges(100, 0.1) == 33
    assert day2_target(1000, 2) == 8
    assert day2_round_count(10 ** 6) == 6
    assert day2_round_count(100) == 4


def test_power_schedule_constants():
    assert coarse_edges(100, 4, 1.0) == 495
    assert sharp_base_edges(100, 4, 0.1) == 49


def test_square_days_plan():
    plans = plan_rounds(make_config())
    assert [p.name for p in plans] == ["day0", "day1", "day2.2", "day2.3", "day2.4", "day3"]
    assert plans[0].kind == "day0"
    assert plans[-1].kind == "cover"
    assert plans[-1].p == pytest.approx(0.01)
    assert plans[2].target == day2_target(100, 2)


def test_coarse_plan_targets():
    plans = plan_rounds(make_config(preset="coarse"))
    assert [p.target for p in plans[:-1]] == [31, 10, 3, 1]
    assert all(p.m == 495 for p in plans)
    assert plans[-1].kind == "cover"


def test_sharp_plans():
    one = plan_rounds(make_config(preset="sharp1"))
    two = plan_rounds(make_config(preset="sharp2"))
    assert [p.name for p in one] == ["first", "shrink.1", "shrink.2", "shrink.3", "shrink.4", "cover"]
    assert [p.name for p in two] == ["first", "second", "cover"]
    assert two[0].m == two[1].m
    assert two[-1].m == 49


@pytest.mark.parametrize("overrides", [
    {"family": "toroidal_grid:4", "n": 16, "preset": "coarse"},
    {"preset": None},
    {"family": "power_of_cycle:3"},
    {"n": 12},
])
def test_schedule_config_errors(overrides):
    with pytest.raises(ParameterError):
        run_schedule(make_config(**overrides))


def test_empty_population_gives_empty_trace():
    trace = run_schedule(make_config(population=0))
    assert trace.rounds == []
    assert trace.population == 0
    assert "empty population" in trace.notes
    assert trace.params["chi"] == 3


def test_coarse_run_is_reproducible():
    config = make_config(preset="coarse", n=20, population=2, seed=3)
    first = run_schedule(config)
    second = run_schedule(config)
    assert first.model_dump() == second.model_dump()
    assert len(first.rounds) == 5
    assert 0.0 <= first.covered_fraction <= 1.0


def test_coarse_fragments_shrink():
    trace = run_schedule(make_config(preset="coarse", n=20, population=2, seed=5))
    sprinkle = [r for r in trace.rounds if r.covered is None]
    for record in sprinkle:
        assert record.checks["subset"]
    for i in range(2):
        sizes = [record.sizes[i] for record in sprinkle]
        assert sizes == sorted(sizes, reverse=True)
        assert sizes[0] <= 40


def test_target_rounds_report_how_many_copies_met_the_target():
    trace = run_schedule(make_config(preset="coarse", n=20, population=2, seed=5))
    sprinkle = [r for r in trace.rounds if r.covered is None]
    assert [r.target for r in sprinkle] == [9, 4, 2, 1]
    for record in sprinkle:
        within = sum(1 for size in record.sizes if size <= record.target)
        assert record.within_target == within
        assert record.checks["target"] == (within == 2)
    assert trace.rounds[-1].within_target is None


@pytest.mark.slow
def test_square_days_round_trip_audit():
    trace = run_schedule(make_config(population=2, seed=9))
    assert trace.audit["roundtrip_failures"] == 0
    assert trace.audit["roundtrip_checked"] == 2
    assert trace.rounds[0].checks["roundtrip"]
    assert trace.rounds[-1].name == "day3"
    assert trace.audit["separation_floor"] == 2
    preimage = trace.audit["preimage"]
    assert preimage["groups"] + preimage["skipped"] == 2
    assert preimage["large_violations"] == 0
