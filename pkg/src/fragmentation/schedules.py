"""
Multi-round sprinkling schedules over a seeded population of planted copies
"""

import math
from typing import Any, Dict, List, Optional, Tuple

import structlog
from pydantic import BaseModel

from ..analysis.census import expectation_threshold
from ..core.config import SCHEDULE_PRESETS, settings
from ..core.exceptions import InfeasibleSizeError, ParameterError, SmoothingRefusedError
from ..core.parallel import map_units
from ..core.seeding import SeedStream, derive_seed
from ..generators.random_graphs import RandomGraphGenerator
from ..models.experiment import ExperimentConfig
from ..models.fragment import Embedding, FragmentTrace, MatchingRule, RoundRecord
from ..models.graph import FamilyKind, FamilySpec, Graph, pair_count
from ..search.embedder import FragmentParams, anchored_copy_search, embedding_graph, sample_fragment
from .diamonds import Day0Params, day0_parameters, plant_diamonds
from .matching import matching_rule, smooth
from .pieces import cut_pieces, run_histogram
from .reconstruction import (
    PreimageCount,
    ReconstructionContext,
    count_preimages,
    decode_preimage,
    encode_preimage,
    preimage_audit,
)

logger = structlog.get_logger(__name__)


class RoundPlan(BaseModel):
    """What one round sprinkles and whether it is the covering round"""
    name: str
    kind: str = "sprinkle"
    m: Optional[int] = None
    p: Optional[float] = None
    target: Optional[int] = None


def day0_edges(n: int, eps: float) -> int:
    """m = floor((1+eps) sqrt(e/n) N)"""
    return int(math.floor((1 + eps) * math.sqrt(math.e / n) * pair_count(n)))


def day1_edges(n: int, eps: float) -> int:
    """m' = floor(eps N / sqrt(n))"""
    return int(math.floor(eps * pair_count(n) / math.sqrt(n)))


def day2_round_count(n: int) -> int:
    """R = ceil(log_1.5(ln n / ln ln n)) + 1"""
    ln_n = math.log(n)
    return int(math.ceil(math.log(ln_n / math.log(ln_n), 1.5))) + 1


def day2_edges(n: int, eps: float) -> int:
    """m' = ceil(eps N / (ln ln n sqrt(n)))"""
    return int(math.ceil(eps * pair_count(n) / (math.log(math.log(n)) * math.sqrt(n))))


def day2_target(n: int, i: int) -> int:
    """f_i = ceil(n^(0.3 (2/3)^(i-2)))"""
    return int(math.ceil(n ** (0.3 * (2.0 / 3.0) ** (i - 2))))


def coarse_edges(n: int, d: int, B: float) -> int:
    """m' = floor(B n^(-2/d) N)"""
    return int(math.floor(B * n ** (-2.0 / d) * pair_count(n)))


def sharp_base_edges(n: int, d: int, eps: float) -> int:
    """m0 = floor(eps n^(-2/d) N)"""
    return int(math.floor(eps * n ** (-2.0 / d) * pair_count(n)))


def plan_rounds(config: ExperimentConfig) -> List[RoundPlan]:
    """Round list of the configured preset"""
    preset, n, eps, spec = config.preset, config.n, config.eps, config.spec
    d = spec.degree
    N = pair_count(n)
    if preset == "square_days":
        R = day2_round_count(n)
        plans = [RoundPlan(name="day0", kind="day0", m=day0_edges(n, eps)), RoundPlan(name="day1", m=day1_edges(n, eps))]
        plans += [
            RoundPlan(name=f"day2.{i}", m=day2_edges(n, eps), target=day2_target(n, i))
            for i in range(2, R + 1)
        ]
        plans.append(RoundPlan(name="day3", kind="cover", p=eps / math.sqrt(n)))
        return plans
    if preset == "coarse":
        m = coarse_edges(n, d, config.B)
        plans = [RoundPlan(name=f"coarse.{i}", m=m, target=int(math.floor(n ** (1 - i / d)))) for i in range(1, d + 1)]
        plans.append(RoundPlan(name="cover", kind="cover", m=m))
        return plans
    if preset in ("sharp1", "sharp2"):
        first = int(math.floor((1 + eps) * expectation_threshold(spec, n) * N))
        m0 = sharp_base_edges(n, d, eps)
        plans = [RoundPlan(name="first", m=first)]
        if preset == "sharp1":
            plans += [RoundPlan(name=f"shrink.{i}", m=m0, target=int(math.floor(n ** (1 - i / d)))) for i in range(1, d + 1)]
        else:
            plans.append(RoundPlan(name="second", m=first))
        plans.append(RoundPlan(name="cover", kind="cover", m=m0))
        return plans
    raise ParameterError(f"Unknown preset '{preset}', expected one of {sorted(SCHEDULE_PRESETS)}")


def _check_config(config: ExperimentConfig) -> FamilySpec:
    spec = config.spec
    if spec.kind != FamilyKind.POWER_OF_CYCLE:
        raise ParameterError(f"schedules run on powers of cycles, got {spec.label}")
    if config.preset is None:
        raise ParameterError("a schedule needs a preset")
    if config.preset == "square_days" and not spec.is_square_of_cycle:
        raise ParameterError("square_days runs on the square of a cycle")
    if config.preset == "square_days" and config.n < 16:
        raise ParameterError(f"square_days needs ln ln n > 1, i.e. n >= 16, got n={config.n}")
    spec.check(config.n)
    for plan in plan_rounds(config):
        if plan.m is not None and not 0 <= plan.m <= pair_count(config.n):
            raise ParameterError(f"round {plan.name} sprinkles m={plan.m} edges, outside [0, N]")
        if plan.p is not None and not 0.0 <= plan.p <= 1.0:
            raise ParameterError(f"round {plan.name} has p={plan.p} outside [0, 1]")
    return spec


def _run_instance(unit: Tuple) -> Dict[str, Any]:
    """All rounds for one planted copy; plain data so results cross process boundaries"""
    config, plans, index, seed, day0, rule = unit
    n = config.n
    spec = config.spec
    budget = config.budget or settings.search_budget
    layout = None
    if config.preset == "square_days":
        layout, F = plant_diamonds(n, day0.chi, derive_seed(seed, "plant", index))
    else:
        F = Embedding(family=spec, perm=tuple(SeedStream(derive_seed(seed, "plant", index)).permutation(n)))

    H = set(embedding_graph(F).edge_set)
    current = F
    W_all: set = set()
    rounds: List[Dict[str, Any]] = []
    audit: Dict[str, Any] = {"roundtrip": None, "preimage": None, "preimage_skipped": False, "candidates": None}

    for r, plan in enumerate(plans):
        record: Dict[str, Any] = {"size": None, "inconclusive": False, "trivial": False, "histogram": {},
                                  "smoothed": False, "refused": False, "rejections": 0, "covered": None, "within_target": False,
                                  "checks": {}}
        generator = RandomGraphGenerator(derive_seed(seed, "sprinkle", index, r))
        if plan.kind == "cover":
            G = generator.gnp(n, plan.p) if plan.p is not None else generator.gnm(n, plan.m)
            record["covered"] = H <= G.edge_set
            record["size"] = len(H)
            rounds.append(record)
            continue

        if plan.kind == "day0":
            W = generator.gnm_rejecting(n, plan.m, forbidden=layout.edges())
            record["rejections"] = generator.rejections
            params = FragmentParams(
                l0=day0.l0, chi=day0.chi, round_cap=config.round_cap, length_threshold=day0.threshold,
                attempts=config.attempts, enforce_cap=config.enforce_cap,
            )
            fragment = sample_fragment(F, W, params, seed=derive_seed(seed, "sample", index), grounded=layout.diamonds, budget=budget)
            audit["candidates"] = fragment.candidates
            if fragment.separated is not None:
                record["checks"]["separated"] = fragment.separated
        else:
            W_all |= generator.gnm(n, plan.m).edge_set
            fragment = anchored_copy_search(
                current, Graph.trusted(n, H | W_all), "minimize_intersection", budget=budget,
                seed=derive_seed(seed, "search", index, r), target=Graph.trusted(n, H),
            )
        if plan.kind == "day0":
            W_all |= W.edge_set

        new_H = set(fragment.edges)
        found = fragment.found
        found_edges = embedding_graph(found).edge_set
        record["checks"]["subset"] = new_H <= H and new_H <= found_edges

        if plan.kind == "day0":
            try:
                cut = cut_pieces(new_H, F.perm, day0.mu, day0.threshold, layout)
                smoothing = smooth(cut, layout, rule, found, F.perm)
                record["smoothed"] = bool(cut.pieces)
                record["checks"]["conserved"] = smoothing.conserved
                record["checks"]["smooth"] = not smoothing.violations
                new_H = set(smoothing.smoothed)
                found = smoothing.witness
                context = ReconstructionContext(n=n, S=tuple(sorted(new_H)), layout=layout, rule=rule, mu=day0.mu)
                x = encode_preimage(F, smoothing, context)
                decoded = decode_preimage(x, context)
                audit["roundtrip"] = decoded == F
                record["checks"]["roundtrip"] = decoded == F
                try:
                    audit["preimage"] = count_preimages(x, context, day0.cap).model_dump()
                except InfeasibleSizeError as e:
                    logger.debug(f"Pre-image count skipped for instance {index}: {e}")
                    audit["preimage_skipped"] = True
            except SmoothingRefusedError as e:
                logger.debug(f"Smoothing refused for instance {index}: {e}")
                record["refused"] = True

        H = new_H
        current = found
        record["size"] = len(H)
        record["inconclusive"] = fragment.inconclusive
        record["trivial"] = fragment.trivial
        record["histogram"] = run_histogram(current.perm, H, spec.k)
        if plan.target is not None and plan.kind == "sprinkle":
            record["checks"]["target"] = record["size"] <= plan.target
            record["within_target"] = record["size"] <= plan.target
        rounds.append(record)
    return {"rounds": rounds, "audit": audit}


def _aggregate(plans: List[RoundPlan], results: List[Dict[str, Any]]) -> List[RoundRecord]:
    records = []
    for r, plan in enumerate(plans):
        per = [result["rounds"][r] for result in results]
        histogram: Dict[int, int] = {}
        checks: Dict[str, bool] = {}
        for item in per:
            for length, count in item["histogram"].items():
                histogram[length] = histogram.get(length, 0) + count
            for name, ok in item["checks"].items():
                checks[name] = checks.get(name, True) and bool(ok)
        covered = sum(1 for item in per if item["covered"]) if plan.kind == "cover" else None
        targeted = plan.target is not None and plan.kind == "sprinkle"
        within = sum(1 for item in per if item["within_target"]) if targeted else None
        records.append(RoundRecord(
            name=plan.name, m=plan.m, p=plan.p, target=plan.target,
            sizes=[item["size"] for item in per],
            inconclusive=sum(1 for item in per if item["inconclusive"]),
            trivial=sum(1 for item in per if item["trivial"]),
            closed_histogram=dict(sorted(histogram.items())),
            smoothing_events=sum(1 for item in per if item["smoothed"]),
            smoothing_refused=sum(1 for item in per if item["refused"]),
            rejections=sum(item["rejections"] for item in per),
            covered=covered,
            within_target=within,
            checks=checks,
        ))
    return records


def run_schedule(config: ExperimentConfig, seed: Optional[int] = None) -> FragmentTrace:
    """Execute the preset's rounds over the population and collect a replayable trace"""
    seed = config.seed if seed is None else seed
    spec = _check_config(config)
    n = config.n
    plans = plan_rounds(config)
    day0: Optional[Day0Params] = None
    rule: Optional[MatchingRule] = None
    params: Dict[str, Any] = {"eps": config.eps, "B": config.B, "round_cap": config.round_cap, "enforce_cap": config.enforce_cap}
    if config.preset == "square_days":
        day0 = day0_parameters(n, config.C, config.w)
        if day0.chi < 1 or n < 6 * day0.chi:
            raise ParameterError(f"n={n} admits no diamond layout with chi={day0.chi}")
        rule = matching_rule(day0.chi, n, day0.beta, derive_seed(seed, "matching"))
        params.update(day0.model_dump())
        params["cap"] = day0.cap
        params["threshold"] = day0.threshold
    params["delta"] = config.delta if config.delta is not None else 1.0 / math.sqrt(n)

    trace = FragmentTrace(
        preset=config.preset, family=spec.label, n=n, population=config.population, params=params,
        seeds={"master": seed, "derivation": "blake2b(master, tag, indices)"},
        notes=["copies are drawn by seeded local search over cyclic orders, not uniformly"],
    )
    if config.population == 0:
        trace.notes.append("empty population")
        return trace

    logger.info(f"Running {config.preset} over {config.population} instances", n=n, rounds=len(plans))
    units = [(config, plans, i, seed, day0, rule) for i in range(config.population)]
    results = map_units(_run_instance, units)
    trace.rounds = _aggregate(plans, results)

    cover = [record for record in trace.rounds if record.covered is not None]
    if cover:
        trace.covered_fraction = cover[-1].covered / config.population
    if config.preset == "square_days":
        trips = [result["audit"]["roundtrip"] for result in results if result["audit"]["roundtrip"] is not None]
        counts = [PreimageCount(**result["audit"]["preimage"]) for result in results if result["audit"]["preimage"] is not None]
        skipped = sum(1 for result in results if result["audit"]["preimage_skipped"])
        audit = preimage_audit(counts, skipped)
        candidates: Dict[int, int] = {}
        for result in results:
            c = result["audit"]["candidates"]
            if c is not None:
                candidates[c] = candidates.get(c, 0) + 1
        floor = int(math.floor(math.log(n) ** 2 / n ** 0.5))
        trace.audit = {
            "roundtrip_checked": len(trips),
            "roundtrip_failures": sum(1 for ok in trips if not ok),
            "preimage": audit.model_dump(),
            "candidate_rounds": dict(sorted(candidates.items())),
            "separation_floor": floor,
        }
        if floor == 0:
            trace.notes.append("separation floor ln^2 n / n^(1/2) rounds to 0 at this n; raw collision counts reported")
    logger.info(f"Finished {config.preset}", covered=trace.covered_fraction)
    return trace
