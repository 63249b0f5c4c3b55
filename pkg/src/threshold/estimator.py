"""
Monte Carlo containment curves and bisection for the finite-n median point
"""

import math
from typing import Dict, List, Optional, Tuple

import structlog
from statsmodels.stats.proportion import proportion_confint

from ..analysis.census import expectation_threshold
from ..core.config import settings
from ..core.exceptions import ParameterError, SpanLabError
from ..core.parallel import map_units
from ..core.seeding import derive_seed
from ..generators.random_graphs import SharedWeights
from ..models.analytics import CurvePoint, ThresholdEstimate
from ..models.fragment import SearchStatus
from ..models.graph import FamilySpec
from ..search.embedder import find_spanning_copy

logger = structlog.get_logger(__name__)


def reference_threshold(n: float, d: int) -> float:
    """(e/n)^(2/d)"""
    if n <= 0 or d <= 0:
        raise ParameterError(f"need n > 0 and d > 0, got n={n}, d={d}")
    return (math.e / n) ** (2.0 / d)


def refined_upper_reference(n: float, d: int) -> float:
    """(e^(2/d) + d/(1 + [d even]) - 1) n^(-2/d)"""
    if n <= 0 or d <= 0:
        raise ParameterError(f"need n > 0 and d > 0, got n={n}, d={d}")
    lead = d / (2 if d % 2 == 0 else 1)
    return (math.exp(2.0 / d) + lead - 1) * n ** (-2.0 / d)


def trial_seed(seed: int, trial: int) -> int:
    """Edge weights of one trial; the same at every p so outcomes couple"""
    return derive_seed(seed, "trial", trial)


def _trial(unit: Tuple) -> Optional[bool]:
    n, p, label, budget, seed, t = unit
    host = SharedWeights(n, trial_seed(seed, t)).graph_at(p)
    result = find_spanning_copy(host, FamilySpec.parse(label), budget=budget, seed=derive_seed(seed, "search", t))
    if result.status == SearchStatus.INCONCLUSIVE:
        return None
    return result.status == SearchStatus.FOUND


def trial_outcomes(n: int, p: float, spec: FamilySpec, trials: int, budget: Optional[int], seed: int) -> List[Optional[bool]]:
    """Per-trial outcome: True found, False none, None inconclusive"""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    spec.check(n)
    budget = budget or settings.search_budget
    return map_units(_trial, [(n, p, spec.label, budget, seed, t) for t in range(trials)])


def curve_point(p: float, outcomes: List[Optional[bool]]) -> CurvePoint:
    """Wilson interval on decided trials; inconclusive ones stay out of the fraction"""
    successes = sum(1 for o in outcomes if o is True)
    decided = sum(1 for o in outcomes if o is not None)
    if decided:
        low, high = proportion_confint(successes, decided, alpha=1 - settings.confidence_level, method="wilson")
    else:
        low, high = 0.0, 1.0
    return CurvePoint(
        p=p, successes=successes, decided=decided, inconclusive=len(outcomes) - decided,
        ci_low=float(low), ci_high=float(high),
    )


def containment_prob(
    n: int, p: float, spec: FamilySpec, trials: int, budget: Optional[int] = None, seed: int = 0,
) -> CurvePoint:
    """Share of G(n, p) samples containing a spanning member of the family"""
    point = curve_point(p, trial_outcomes(n, p, spec, trials, budget, seed))
    logger.debug(f"p={p:.4f}: {point.successes}/{point.decided} found", inconclusive=point.inconclusive)
    return point


def coupling_violations(outcomes: Dict[float, List[Optional[bool]]]) -> int:
    """Trials found at a lower p but decided absent at a higher one"""
    grid = sorted(outcomes)
    violations = 0
    for a in range(len(grid)):
        for b in range(a + 1, len(grid)):
            low, high = outcomes[grid[a]], outcomes[grid[b]]
            violations += sum(1 for x, y in zip(low, high) if x is True and y is False)
    return violations


def curve_anomaly(curve: List[CurvePoint]) -> bool:
    """A lower-p probe whose interval lies strictly above a higher-p probe's"""
    points = sorted((c for c in curve if c.decided), key=lambda c: c.p)
    for a in range(len(points)):
        for b in range(a + 1, len(points)):
            if points[a].ci_low > points[b].ci_high:
                return True
    return False


def bisect_threshold(
    n: int,
    spec: FamilySpec,
    trials_per_probe: int,
    tol: float = 0.02,
    seed: int = 0,
    budget: Optional[int] = None,
    max_probes: int = 40,
) -> ThresholdEstimate:
    """
    Bisect on p for containment probability 1/2

    The bracket starts at [0, 1]; a probe whose interval lies above 1/2 moves the
    upper end, one below moves the lower end. Bisection stops once the bracket is
    within tol or a probe's interval straddles 1/2.
    """
    if trials_per_probe < 1:
        raise ParameterError(f"trials_per_probe must be positive, got {trials_per_probe}")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    spec.check(n)
    d = spec.degree
    estimate = ThresholdEstimate(
        n=n, family=spec.label, trials_per_probe=trials_per_probe, seeds=[seed],
        p_reference=reference_threshold(n, d), p_refined_upper=refined_upper_reference(n, d),
        notes=[
            f"Wilson intervals at {settings.confidence_level:.0%} on decided trials",
            "p_hat is the finite-n median point of the containment curve",
        ],
    )
    try:
        estimate.p_expectation = expectation_threshold(spec, n)
    except SpanLabError as e:
        estimate.notes.append(f"expectation threshold unavailable: {e}")

    if tol > 1:
        estimate.degenerate = True
        estimate.bracket = [0.0, 1.0]
        estimate.notes.append(f"tol={tol} exceeds the unit interval; no probes run")
        return estimate

    outcomes: Dict[float, List[Optional[bool]]] = {}
    lo, hi = 0.0, 1.0
    for _ in range(max_probes):
        if hi - lo <= tol:
            break
        mid = (lo + hi) / 2.0
        results = trial_outcomes(n, mid, spec, trials_per_probe, budget, seed)
        point = curve_point(mid, results)
        estimate.curve.append(point)
        if point.inconclusive_fraction > settings.inconclusive_discard_rate:
            logger.warning(f"Discarding probe p={mid:.4f}: {point.inconclusive_fraction:.1%} inconclusive")
            estimate.discarded_probes.append(mid)
            estimate.notes.append(f"probe p={mid:.6f} discarded, inconclusive share {point.inconclusive_fraction:.3f}")
            break
        outcomes[mid] = results
        if curve_anomaly(estimate.curve) or coupling_violations(outcomes):
            estimate.anomaly = True
            estimate.notes.append("non-monotone probes; bisection aborted")
            logger.warning("Containment curve is not monotone in p", n=n, family=spec.label)
            break
        if point.ci_low > 0.5:
            hi = mid
        elif point.ci_high < 0.5:
            lo = mid
        else:
            lo = hi = mid
            break

    estimate.curve.sort(key=lambda c: c.p)
    estimate.bracket = [lo, hi]
    if not estimate.anomaly and not estimate.discarded_probes:
        estimate.p_hat = (lo + hi) / 2.0
        if estimate.p_expectation is not None and estimate.p_hat <= estimate.p_expectation:
            estimate.notes.append("p_hat does not exceed the expectation threshold")
    logger.info(f"Threshold bracket [{lo:.4f}, {hi:.4f}]", n=n, family=spec.label, probes=len(estimate.curve))
    return estimate


def containment_curve(
    n: int, spec: FamilySpec, grid: List[float], trials: int, seed: int = 0, budget: Optional[int] = None,
) -> Tuple[List[CurvePoint], int]:
    """Curve over a fixed p grid with shared trial weights, plus the count of coupling violations"""
    outcomes = {p: trial_outcomes(n, p, spec, trials, budget, seed) for p in sorted(set(grid))}
    curve = [curve_point(p, results) for p, results in outcomes.items()]
    return curve, coupling_violations(outcomes)
