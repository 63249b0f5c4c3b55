"""
Expected copy counts M(t), the weighted intersection tail evaluated from census data,
and empirical badness of (F, W) pairs
"""

import math
from typing import Dict, Optional

import numpy as np
import structlog
from statsmodels.stats.proportion import proportion_confint

from ..analysis.bounds import BoundConstants, beta_bound, log_binom, log_factorial
from ..analysis.census import CopyUniverse, popcount64
from ..core.config import settings
from ..core.exceptions import InfeasibleSizeError, ParameterError
from ..core.seeding import derive_seed
from ..generators.families import build_family
from ..generators.random_graphs import RandomGraphGenerator
from ..models.census import CensusTable, ExtensionProfile
from ..models.fragment import BadnessEstimate, Embedding, LhsResult
from ..models.graph import pair_count
from ..search.embedder import EXACT_SEARCH_LIMIT, anchored_copy_search, embedding_graph, enumerate_copies

logger = structlog.get_logger(__name__)


def compute_M(log_family_size: float, N: int, f: int, m: int, t: int) -> float:
    """ln M(t) = ln|F_n| + ln C(N-f, m-t) - ln C(N, m+f-t)"""
    if not 0 <= t <= f <= m <= N:
        raise ParameterError(f"need 0 <= t <= f <= m <= N, got t={t}, f={f}, m={m}, N={N}")
    if m + f - t > N:
        raise ParameterError(f"m+f-t = {m + f - t} exceeds N = {N}")
    return log_family_size + log_binom(N - f, m - t) - log_binom(N, m + f - t)


def _log_weight(l: int, f: int, m: int, N: int) -> float:
    return l * math.log((1 + 3 * f / m) * N / m) - f * f / m + f ** 3 / (3 * m * m)


def exact_intersection_counts(profile: ExtensionProfile) -> Dict[int, int]:
    """Number of members meeting F in exactly l edges, by inclusion-exclusion over E_j"""
    mass = profile.level_mass()
    top = max(mass) if mass else 0
    counts = {}
    for l in range(1, top + 1):
        total = 0
        for j in range(l, top + 1):
            total += (-1) ** (j - l) * math.comb(j, l) * mass.get(j, 0)
        counts[l] = total
    return counts


def fragmentation_lhs(
    table: CensusTable,
    f: int,
    m: int,
    l_cut: int,
    delta: float,
    mode: str = "exact",
    profile: Optional[ExtensionProfile] = None,
    consts: Optional[BoundConstants] = None,
    aut: Optional[int] = None,
) -> LhsResult:
    """
    Sum over l > l_cut of Pi_l ((1+3f/m) N/m)^l e^(-f^2/m + f^3/(3m^2)), compared with delta^3

    Pi_l is the share of members meeting F in exactly l edges ("exact"), its
    union upper bound E_l/|F_n| ("union") or the census count times the beta
    bound ("surrogate"). The last two are flagged.
    """
    d, n = table.d, table.n
    N = pair_count(n)
    if not 0 < m <= N:
        raise ParameterError(f"m must lie in (0, N], got m={m}, N={N}")
    if f < 0 or l_cut < 0:
        raise ParameterError(f"f and l_cut must be non-negative, got f={f}, l_cut={l_cut}")
    target = delta ** 3
    if l_cut >= f:
        return LhsResult(value=0.0, delta=delta, target=target, passed=True, mode=mode)

    missing = table.missing_levels(l_cut + 1, f)
    if missing:
        raise ParameterError(f"census table lacks levels {missing}")

    if mode in ("exact", "union"):
        if profile is None:
            raise ParameterError(f"{mode} mode needs an extension profile")
        copies = profile.copies
        if mode == "exact":
            share = {l: c / copies for l, c in exact_intersection_counts(profile).items()}
        else:
            share = {l: mass / copies for l, mass in profile.level_mass().items()}
    elif mode == "surrogate":
        consts = consts or BoundConstants()
        log_size = log_copies_for_table(table, aut)
        share = {}
        for key, count in table.items():
            if key.l <= l_cut or key.sigma(d) < 0:
                continue
            share[key.l] = share.get(key.l, 0.0) + count * math.exp(beta_bound(d, n, key, consts, aut or 1) - log_size)
    else:
        raise ParameterError(f"Unknown lhs mode '{mode}'")

    terms = {}
    for l in range(l_cut + 1, f + 1):
        pi = share.get(l, 0.0)
        terms[l] = pi * math.exp(_log_weight(l, f, m, N)) if pi else 0.0
    value = float(sum(terms.values()))
    logger.debug(f"Intersection tail {value:.3e} against {target:.3e}", mode=mode, l_cut=l_cut)
    return LhsResult(
        value=value, delta=delta, target=target, passed=value <= target, mode=mode,
        flagged=mode != "exact", terms=terms,
    )


def log_copies_for_table(table: CensusTable, aut: Optional[int]) -> float:
    """ln(n!/|Aut|) for the table's host"""
    return log_factorial(table.n) - math.log(aut or 1)


def lhs_oracle(universe: CopyUniverse, F_mask: int, f: int, m: int, l_cut: int) -> float:
    """Direct sum over every member F' of the weight of |F' meet F| above l_cut"""
    N = pair_count(universe.n)
    overlaps = popcount64(universe.masks & np.uint64(F_mask))
    total = 0.0
    for t in range(l_cut + 1, f + 1):
        hits = int(np.count_nonzero(overlaps == t))
        if hits:
            total += hits / universe.size * math.exp(_log_weight(t, f, m, N))
    return total


def badness_estimate(
    F: Embedding,
    m: int,
    l_cut: int,
    trials: int,
    seed: int,
    delta: Optional[float] = None,
    mode: str = "auto",
    samples: int = 20,
) -> BadnessEstimate:
    """Share of W ~ G(n, m) for which more than a delta fraction of copies in F + W meet F in over l_cut edges"""
    n = F.n
    N = pair_count(n)
    if not 0 <= m <= N:
        raise ParameterError(f"m must lie in [0, N], got m={m}")
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    delta = 1.0 / math.sqrt(n) if delta is None else delta
    if mode == "auto":
        if n <= settings.universe_limit:
            mode = "exact"
        elif n <= EXACT_SEARCH_LIMIT:
            mode = "enumerate"
        else:
            mode = "sampled"
    if mode == "exact" and n > settings.universe_limit:
        raise InfeasibleSizeError(f"exact badness needs n <= {settings.universe_limit}, got n={n}")
    if mode == "enumerate" and n > EXACT_SEARCH_LIMIT:
        raise InfeasibleSizeError(f"enumerated badness needs n <= {EXACT_SEARCH_LIMIT}, got n={n}")
    if mode not in ("exact", "enumerate", "sampled"):
        raise ParameterError(f"Unknown badness mode '{mode}'")

    F_graph = embedding_graph(F)
    universe = CopyUniverse.build(build_family(F.family, n), F.family) if mode == "exact" else None
    F_mask = universe.mask_of(F_graph) if universe is not None else 0

    bad = 0
    for t in range(trials):
        W = RandomGraphGenerator(derive_seed(seed, "badness", t)).gnm(n, m)
        host = F_graph.union(W)
        if mode == "exact":
            members = universe.within(host)
            overlaps = popcount64(members & np.uint64(F_mask))
            share = float(np.count_nonzero(overlaps > l_cut)) / members.size
        elif mode == "enumerate":
            pattern = build_family(F.family, n)
            copies = enumerate_copies(host, F.family)
            large = 0
            for perm in copies:
                edges = {(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in pattern.edges}
                large += len(edges & F_graph.edge_set) > l_cut
            share = large / len(copies)
        else:
            draws = [
                anchored_copy_search(F, W, "sample", seed=derive_seed(seed, "badness-draw", t, s))
                for s in range(samples)
            ]
            share = sum(1 for draw in draws if draw.size > l_cut) / samples
        bad += share > delta

    low, high = proportion_confint(bad, trials, alpha=1 - settings.confidence_level, method="wilson")
    return BadnessEstimate(
        n=n, m=m, l_cut=l_cut, delta=delta, trials=trials, bad=bad, fraction=bad / trials,
        ci_low=float(low), ci_high=float(high), mode=mode, flagged=mode == "sampled",
    )
