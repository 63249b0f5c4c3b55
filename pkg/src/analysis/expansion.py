"""
Edge/vertex boundaries, local sparsity certification and closed-subgraph enumeration

Connected vertex sets are enumerated with the ESU scheme (each connected set is
produced exactly once, rooted at its minimum vertex) over neighbourhood
bitmasks, with an optional lower bound on the boundary any extension can reach.
"""

import math
from collections import Counter, defaultdict
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import structlog
from networkx.algorithms.isomorphism import GraphMatcher
from pydantic import BaseModel, Field

from ..core.config import settings
from ..core.exceptions import BudgetExceededError, InfeasibleSizeError, ParameterError
from ..models.analytics import BoundaryReport, ClaimViolation, ClosedClaimsReport, ConditionId, ConditionVerdict
from ..models.census import delta_level
from ..models.graph import Graph
from .automorphisms import automorphism_count, fixing_automorphism_count, is_automorphism

logger = structlog.get_logger(__name__)


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def vertices_of(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def host_degree(F: Graph) -> int:
    """Regularity degree of F, from its tag or by inspection"""
    if F.d is not None:
        return F.d
    degrees = F.degrees()
    if not degrees or any(deg != degrees[0] for deg in degrees):
        raise ParameterError("host graph must be regular")
    return degrees[0]


def edge_boundary(F: Graph, S: Iterable[int]) -> int:
    """Number of F-edges with exactly one endpoint in S (boundary of the induced subgraph F[S])"""
    masks = F.masks
    s_mask = mask_of(S)
    return sum((masks[u] & ~s_mask).bit_count() for u in vertices_of(s_mask))


def boundary_report(F: Graph, S: Iterable[int], edges: Optional[Iterable[Tuple[int, int]]] = None) -> BoundaryReport:
    """Edge boundary size and vertex boundary of F[S], or of the subgraph (S, edges) when edges are given"""
    subject = sorted(set(S))
    host_deg = F.degrees()
    if edges is None:
        sub_edges = F.edges_within(subject)
        induced = True
    else:
        sub_edges = [tuple(sorted(e)) for e in edges]
        induced = set(sub_edges) == set(F.edges_within(subject))
    sub_deg: Dict[int, int] = Counter()
    for u, v in sub_edges:
        sub_deg[u] += 1
        sub_deg[v] += 1
    deficit = {v: host_deg[v] - sub_deg[v] for v in subject}
    size = sum(deficit.values())
    vertex_boundary = [v for v in subject if deficit[v] > 0]

    is_closed = False
    if induced and 3 <= len(subject) and F.is_regular():
        d = host_deg[0]
        connected = nx.is_connected(nx.Graph(sub_edges)) if sub_edges else False
        is_closed = connected and len(set(v for e in sub_edges for v in e)) == len(subject) and size == delta_level(d)
    return BoundaryReport(
        subject=subject,
        edge_boundary_size=size,
        vertex_boundary=vertex_boundary,
        is_closed=is_closed,
        induced=induced,
    )


class ConnectedSetEnumerator:
    """ESU enumeration of connected induced vertex sets with a visit budget"""

    def __init__(self, masks: Sequence[int], budget: Optional[int] = None, degree: Optional[int] = None):
        self.masks = list(masks)
        self.n = len(self.masks)
        self.budget = budget or settings.enumeration_budget
        self.degree = degree
        self.visited = 0
        self._degrees = [m.bit_count() for m in self.masks]

    def _lower_bound(self, s_mask: int, n_mask: int, boundary: int, added: int, exact: bool) -> int:
        """Least boundary a superset with exactly `added` more vertices (or up to `added`) can have"""
        d = self.degree
        outside = n_mask & ~s_mask
        ties = sorted(((self.masks[u] & s_mask).bit_count() for u in vertices_of(outside)), reverse=True)
        running = boundary
        best = None
        for i in range(added):
            # the i-th added vertex sees at most e(u, S) + i earlier vertices
            e = ties[i] if i < len(ties) else 0
            running += d - 2 * min(d, e + i)
            if best is None or running < best:
                best = running
        return running if exact else best

    def iter_sets(
        self,
        k_max: int,
        k_min: int = 1,
        max_boundary: Optional[int] = None,
        roots: Optional[Iterable[int]] = None,
    ) -> Iterator[Tuple[int, int, int]]:
        """Yield (set mask, size, boundary) for connected sets with k_min <= size <= k_max"""
        prune = max_boundary is not None and self.degree is not None
        exact = k_min == k_max
        for v in (range(self.n) if roots is None else roots):
            higher = ~((1 << (v + 1)) - 1)
            start = 1 << v
            ext = self.masks[v] & higher
            yield from self._extend(start, 1, self._degrees[v], ext, higher, self.masks[v], k_max, k_min, max_boundary, prune, exact)

    def _extend(self, s_mask, size, boundary, ext, higher, n_mask, k_max, k_min, max_boundary, prune, exact):
        self.visited += 1
        if self.visited > self.budget:
            raise BudgetExceededError(f"enumeration budget {self.budget} exhausted", reached=size, visited=self.visited)
        if size >= k_min:
            yield s_mask, size, boundary
        if size == k_max:
            return
        if prune:
            if self._lower_bound(s_mask, n_mask, boundary, k_max - size, exact) > max_boundary:
                return
        masks = self.masks
        pending = ext
        while pending:
            low = pending & -pending
            w = low.bit_length() - 1
            pending ^= low
            exclusive = masks[w] & ~(s_mask | n_mask) & higher
            new_boundary = boundary + self._degrees[w] - 2 * (masks[w] & s_mask).bit_count()
            yield from self._extend(
                s_mask | low, size + 1, new_boundary, pending | exclusive, higher, n_mask | masks[w],
                k_max, k_min, max_boundary, prune, exact,
            )


def enumerate_connected_sets(F: Graph, k_max: int, k_min: int = 1, budget: Optional[int] = None) -> Iterator[FrozenSet[int]]:
    """Every connected induced vertex set of F with k_min..k_max vertices, exactly once"""
    enumerator = ConnectedSetEnumerator(F.masks, budget)
    for s_mask, _, _ in enumerator.iter_sets(k_max, k_min):
        yield frozenset(vertices_of(s_mask))


def _sort_key(vertex_set: Iterable[int]) -> Tuple[int, Tuple[int, ...]]:
    ordered = tuple(sorted(vertex_set))
    return len(ordered), ordered


def enumerate_closed_subgraphs(F: Graph, v_max: int, budget: Optional[int] = None) -> List[FrozenSet[int]]:
    """Connected induced subgraphs on 3..v_max vertices with edge boundary exactly Delta"""
    d = host_degree(F)
    if not 3 <= v_max <= F.n - 3:
        raise ParameterError(f"v_max must lie in [3, n-3] = [3, {F.n - 3}], got {v_max}")
    delta = delta_level(d)
    enumerator = ConnectedSetEnumerator(F.masks, budget, degree=d)
    closed = [
        frozenset(vertices_of(s_mask))
        for s_mask, _, boundary in enumerator.iter_sets(v_max, 3, max_boundary=delta)
        if boundary == delta
    ]
    closed.sort(key=_sort_key)
    logger.debug(f"Enumerated {len(closed)} closed subgraphs", v_max=v_max, visited=enumerator.visited)
    return closed


def sparsity_requirement(rule: str, d: int, n: int, w: Optional[float] = None, delta: Optional[float] = None) -> Callable[[int], int]:
    """Minimum admissible edge boundary as a function of the subgraph size"""
    if rule == "d+1":
        return lambda x: d + 1
    if rule == "2d":
        return lambda x: 2 * d
    if rule == "growing":
        if w is None or delta is None or w <= 0:
            raise ParameterError("rule 'growing' needs w > 0 and delta")
        log_n = math.log(n)

        def growing(x: int) -> int:
            gated = log_n / w <= x <= n ** (1.0 - delta)
            return d + 1 + (math.floor(x * w / log_n) if gated else 0)

        return growing
    raise ParameterError(f"Unknown sparsity rule '{rule}'")


def check_local_sparsity(
    F: Graph,
    rule: str,
    v_range: Tuple[int, int],
    w: Optional[float] = None,
    delta: Optional[float] = None,
    budget: Optional[int] = None,
    condition: ConditionId = ConditionId.LOCAL_SPARSITY,
) -> ConditionVerdict:
    """Verify the boundary rule over connected subgraphs with sizes in v_range"""
    d = host_degree(F)
    lo, hi = v_range
    params = {"rule": rule, "v_range": [lo, hi]}
    if w is not None:
        params["w"] = w
    if delta is not None:
        params["delta"] = delta
    if lo > hi:
        return ConditionVerdict(condition=condition, params=params, holds=True, vacuous=True)
    if lo < 3 or hi > F.n - 3:
        raise ParameterError(f"v_range must lie within [3, n-3] = [3, {F.n - 3}], got [{lo}, {hi}]")

    need = sparsity_requirement(rule, d, F.n, w, delta)
    enumerator = ConnectedSetEnumerator(F.masks, budget, degree=d)
    min_seen: Optional[int] = None
    for k in range(lo, hi + 1):
        threshold = need(k)
        violators: List[int] = []
        try:
            for s_mask, _, boundary in enumerator.iter_sets(k, k, max_boundary=threshold - 1):
                if min_seen is None or boundary < min_seen:
                    min_seen = boundary
                if boundary < threshold:
                    violators.append(s_mask)
        except BudgetExceededError:
            logger.info(f"Sparsity check inconclusive at size {k}", rule=rule, visited=enumerator.visited)
            return ConditionVerdict(
                condition=condition, params=params, holds=True, inconclusive=True, reached=k - 1,
                stats={"visited": enumerator.visited, "min_boundary": min_seen},
            )
        if violators:
            witness = min((vertices_of(m) for m in violators), key=tuple)
            return ConditionVerdict(
                condition=condition, params=params, holds=False, witness=witness, reached=k,
                stats={"visited": enumerator.visited, "boundary": edge_boundary(F, witness), "required": threshold},
            )
    return ConditionVerdict(
        condition=condition, params=params, holds=True, reached=hi,
        stats={"visited": enumerator.visited, "min_boundary": min_seen},
    )


def verify_closed_claims(F: Graph, v_max: int, budget: Optional[int] = None) -> ClosedClaimsReport:
    """Exact check of the minimum-degree, pair-count and prefix-count properties of closed subgraphs"""
    d = host_degree(F)
    n = F.n
    report = ClosedClaimsReport(n=n, d=d, v_max=v_max)

    sparsity = check_local_sparsity(F, "d+1", (3, min(v_max, n - 3)), budget=budget)
    if sparsity.inconclusive:
        report.inconclusive = True
        return report
    if not sparsity.holds:
        report.precondition_failed = True
        report.precondition_witness = sparsity.witness
        return report

    try:
        closed = enumerate_closed_subgraphs(F, v_max, budget)
    except BudgetExceededError:
        report.inconclusive = True
        return report

    masks = F.masks
    by_size: Dict[int, List[FrozenSet[int]]] = defaultdict(list)
    for S in closed:
        by_size[len(S)].append(S)
    report.closed_counts = {v: len(sets) for v, sets in sorted(by_size.items())}

    # closed subgraphs have minimum degree at least d/2
    for S in closed:
        s_mask = mask_of(S)
        low = min((masks[u] & s_mask).bit_count() for u in S)
        if report.min_degree_observed is None or low < report.min_degree_observed:
            report.min_degree_observed = low
        if 2 * low < d:
            report.violations.append(ClaimViolation(claim="min_degree", subject=sorted(S), detail=f"min degree {low} < d/2"))

    # at most two closed v-sets contain x and avoid its neighbour y
    for v, sets in by_size.items():
        pair_counts: Counter = Counter()
        for S in sets:
            s_mask = mask_of(S)
            for x in S:
                for y in vertices_of(masks[x] & ~s_mask):
                    pair_counts[(x, y)] += 1
        for (x, y), count in pair_counts.items():
            report.max_pair_count = max(report.max_pair_count, count)
            if count > 2:
                report.violations.append(ClaimViolation(claim="pair_count", subject=[x, y], detail=f"{count} closed {v}-sets contain {x} and avoid {y}"))

    # closed v-sets inside the prefix [k] number at most 2dk/3
    for v, sets in by_size.items():
        tops = Counter(max(S) for S in sets)
        running = 0
        for k in range(1, n + 1):
            running += tops.get(k - 1, 0)
            allowed = 2 * d * k / 3
            if running:
                report.max_prefix_ratio = max(report.max_prefix_ratio, running / allowed)
            if running > allowed:
                report.violations.append(ClaimViolation(claim="prefix_count", subject=list(range(k)), detail=f"{running} closed {v}-sets inside [{k}] > {allowed:.2f}"))

    logger.info(
        f"Closed-subgraph claims checked: {len(closed)} sets, {len(report.violations)} violations",
        n=n, v_max=v_max,
    )
    return report


def boundary_fixing_automorphisms(F: Graph, S: Iterable[int]) -> int:
    """Automorphisms of F[S] fixing its vertex boundary pointwise"""
    subject = sorted(set(S))
    report = boundary_report(F, subject)
    return fixing_automorphism_count(subject, F.edges_within(subject), report.vertex_boundary)


class ConditionParams(BaseModel):
    """Free parameters of the threshold hypotheses"""
    eps: float = Field(default=1.0, gt=0.0)
    delta: float = Field(default=0.25, gt=0.0, lt=1.0)
    w: Optional[float] = Field(default=None, gt=0.0)
    gamma: float = Field(default=0.5, gt=0.0, lt=1.0)
    C: float = Field(default=4.0, gt=0.0)
    D: int = Field(default=1, ge=1)
    shift: Optional[int] = Field(default=None, ge=1)
    v_cap: Optional[int] = Field(default=None, ge=3)


def _capped_range(F: Graph, hi: int, v_cap: int) -> Tuple[Tuple[int, int], bool]:
    top = min(hi, F.n - 3)
    if top > v_cap:
        return (3, v_cap), True
    return (3, top), False


def _mark_capped(verdict: ConditionVerdict, capped: bool) -> ConditionVerdict:
    if capped and verdict.holds and not verdict.vacuous:
        return verdict.model_copy(update={"inconclusive": True})
    return verdict


def _fixing_automorphism_check(F: Graph, params: ConditionParams, v_cap: int, budget: Optional[int]) -> ConditionVerdict:
    d = host_degree(F)
    edge_cap = params.C * F.n ** (2.0 / d)
    enumerator = ConnectedSetEnumerator(F.masks, budget)
    worst = 0
    offenders: List[List[int]] = []
    try:
        for s_mask, size, boundary in enumerator.iter_sets(v_cap, 1):
            subject = vertices_of(s_mask)
            outside = ~s_mask
            vertex_boundary = [u for u in subject if F.masks[u] & outside]
            if len(vertex_boundary) > params.gamma * size:
                continue
            induced_edges = (d * size - boundary) // 2
            if induced_edges > edge_cap:
                continue
            count = fixing_automorphism_count(subject, F.edges_within(subject), vertex_boundary)
            worst = max(worst, count)
            if count > params.D:
                offenders.append(subject)
    except BudgetExceededError:
        return ConditionVerdict(condition=ConditionId.RIGID_BOUNDARY, holds=True, inconclusive=True, stats={"max_fixing_automorphisms": worst})
    cond_params = {"gamma": params.gamma, "C": params.C, "D": params.D}
    if offenders:
        witness = min(offenders, key=_sort_key)
        return ConditionVerdict(condition=ConditionId.RIGID_BOUNDARY, params=cond_params, holds=False, witness=witness, stats={"max_fixing_automorphisms": worst, "part": "a"})
    return ConditionVerdict(condition=ConditionId.RIGID_BOUNDARY, params=cond_params, holds=True, stats={"max_fixing_automorphisms": worst})


def check_cyclic_shift(F: Graph, r: int, budget: Optional[int] = None) -> ConditionVerdict:
    """r-shift cyclic family hypotheses: sparsity up to r, v -> v+r automorphism, bandwidth r, rigidity on [r]"""
    d = host_degree(F)
    n = F.n
    params = {"r": r}
    shift = [(v + r) % n for v in range(n)]
    if not is_automorphism(F, shift):
        for u, v in F.edges:
            if not F.has_edge(shift[u], shift[v]):
                return ConditionVerdict(condition=ConditionId.CYCLIC_SHIFT, params=params, holds=False, witness=[u, v], stats={"part": "shift"})
    for u, v in F.edges:
        gap = min(v - u, n - (v - u))
        if gap > r:
            return ConditionVerdict(condition=ConditionId.CYCLIC_SHIFT, params=params, holds=False, witness=[u, v], stats={"part": "bandwidth"})

    g = F.to_networkx()
    for v in g.nodes:
        g.nodes[v]["pin"] = v if v < r else -1
    matcher = GraphMatcher(g, g, node_match=lambda a, b: a["pin"] == b["pin"])
    for mapping in matcher.isomorphisms_iter():
        moved = sorted(v for v, image in mapping.items() if v != image)
        if moved:
            return ConditionVerdict(condition=ConditionId.CYCLIC_SHIFT, params=params, holds=False, witness=moved, stats={"part": "rigidity"})

    sparsity = check_local_sparsity(F, "d+1", (3, min(r, n - 3)), budget=budget, condition=ConditionId.CYCLIC_SHIFT)
    if not sparsity.holds:
        return sparsity.model_copy(update={"params": params})
    return ConditionVerdict(condition=ConditionId.CYCLIC_SHIFT, params=params, holds=True, inconclusive=sparsity.inconclusive, stats={"d": d})


def classify_conditions(F: Graph, params: Optional[ConditionParams] = None, budget: Optional[int] = None) -> List[ConditionVerdict]:
    """One verdict per threshold hypothesis, restricted to enumerable subgraph sizes"""
    params = params or ConditionParams()
    d = host_degree(F)
    n = F.n
    v_cap = params.v_cap or min(max(n - 3, 3), 10)
    w = params.w if params.w is not None else max(math.log(math.log(max(n, 3))), 0.5)
    verdicts: List[ConditionVerdict] = []

    local_hi = math.floor(params.eps * math.log(n))
    v_range, capped = _capped_range(F, local_hi, v_cap)
    verdict = check_local_sparsity(F, "d+1", v_range, budget=budget, condition=ConditionId.LOCAL_EXPANSION)
    verdicts.append(_mark_capped(verdict.model_copy(update={"params": {**verdict.params, "eps": params.eps}}), capped))

    v_range, capped = _capped_range(F, n - 3, v_cap)
    verdict = check_local_sparsity(F, "growing", v_range, w=w, delta=params.delta, budget=budget, condition=ConditionId.GROWING_BOUNDARY)
    try:
        aut = automorphism_count(F)
    except InfeasibleSizeError:
        aut = None
    verdict = verdict.model_copy(update={"stats": {**verdict.stats, "automorphisms": aut}})
    verdicts.append(_mark_capped(verdict, capped))

    verdict_c = check_local_sparsity(F, "2d", v_range, budget=budget, condition=ConditionId.RIGID_BOUNDARY)
    if not verdict_c.holds:
        verdicts.append(verdict_c.model_copy(update={"stats": {**verdict_c.stats, "part": "c"}}))
    else:
        verdict_a = _fixing_automorphism_check(F, params, v_cap, budget)
        inconclusive = verdict_a.inconclusive or verdict_c.inconclusive
        verdicts.append(_mark_capped(verdict_a.model_copy(update={"inconclusive": inconclusive}), capped))

    verdict = check_local_sparsity(F, "2d", v_range, budget=budget, condition=ConditionId.DOUBLE_DEGREE)
    verdicts.append(_mark_capped(verdict, capped))

    if params.shift is not None:
        verdicts.append(check_cyclic_shift(F, params.shift, budget))

    logger.info(f"Classified {len(verdicts)} conditions", n=n, d=d)
    return verdicts


def component_automorphism_audit(F: Graph, v_max: int, budget: Optional[int] = None) -> Dict[str, object]:
    """Empirical check of |Aut(z)| <= |V(z)| (d-1)^|V(z)| over connected induced subgraphs z"""
    d = host_degree(F)
    enumerator = ConnectedSetEnumerator(F.masks, budget)
    representatives: Dict[str, List[Tuple[nx.Graph, int]]] = defaultdict(list)
    checked = 0
    worst_ratio = 0.0
    violations: List[List[int]] = []
    for s_mask, size, _ in enumerator.iter_sets(v_max, 2):
        subject = vertices_of(s_mask)
        g = nx.Graph(F.edges_within(subject))
        key = nx.weisfeiler_lehman_graph_hash(g)
        aut = None
        for rep, rep_aut in representatives[key]:
            if nx.is_isomorphic(rep, g):
                aut = rep_aut
                break
        if aut is None:
            aut = sum(1 for _ in GraphMatcher(g, g).isomorphisms_iter())
            representatives[key].append((g, aut))
        bound = size * (d - 1) ** size
        checked += 1
        worst_ratio = max(worst_ratio, aut / bound)
        if aut > bound:
            violations.append(subject)
    return {
        "checked": checked,
        "shapes": sum(len(v) for v in representatives.values()),
        "worst_ratio": worst_ratio,
        "violations": violations,
    }
