"""
Subgraph census of a fixed host grouped by (l, x, c), exact extension counting
and the copy universe of small families
"""

import functools
import itertools
import math
from collections import Counter, defaultdict
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx
import numpy as np
import structlog
from networkx.algorithms.isomorphism import GraphMatcher
from scipy.special import gammaln

from ..core.config import settings
from ..core.exceptions import BudgetExceededError, ConsistencyError, InfeasibleSizeError, ParameterError
from ..core.parallel import map_units
from ..core.seeding import SeedStream
from ..generators.families import build_family
from ..models.census import CensusKey, CensusTable, ExtensionProfile, KeyTuple, SpreadReport
from ..models.graph import FamilySpec, Graph, pair_index
from .automorphisms import automorphism_count, is_vertex_transitive
from .expansion import ConnectedSetEnumerator, host_degree, vertices_of

logger = structlog.get_logger(__name__)

_CHUNK = 1 << 16


def excess(d: int, key: CensusKey) -> Fraction:
    """sigma = (d/2)x - l - (Delta/2)c"""
    return key.sigma(d)


def _encode(l, x, c, n):
    return (l * (n + 1) + x) * (n + 1) + c


def _decode(code: int, n: int) -> KeyTuple:
    c = code % (n + 1)
    rest = code // (n + 1)
    return (rest // (n + 1), rest % (n + 1), c)


def powerset_codes(F: Graph, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """(l, x, c) code of every edge subset of F with bitmask in [start, stop), indexed from start"""
    E = F.num_edges
    if E > settings.powerset_edge_limit:
        raise InfeasibleSizeError(f"powerset census needs at most {settings.powerset_edge_limit} edges, got {E}")
    n = F.n
    us = np.array([u for u, _ in F.edges], dtype=np.int64)
    vs = np.array([v for _, v in F.edges], dtype=np.int64)
    incidence = np.zeros((E, n), dtype=np.int32)
    incidence[np.arange(E), us] = 1
    incidence[np.arange(E), vs] = 1
    shifts = np.arange(E, dtype=np.int64)
    identity = np.arange(n, dtype=np.int64)

    stop = 1 << E if stop is None else stop
    if not 0 <= start <= stop <= 1 << E:
        raise ParameterError(f"mask range [{start}, {stop}) is outside [0, 2^{E})")
    codes = np.empty(stop - start, dtype=np.int64)
    for lo in range(start, stop, _CHUNK):
        masks = np.arange(lo, min(lo + _CHUNK, stop), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        l = bits.sum(axis=1)
        degree = bits.astype(np.int32) @ incidence
        present = degree > 0
        x = present.sum(axis=1)

        labels = np.tile(identity, (masks.size, 1))
        changed = True
        while changed:
            changed = False
            for j in range(E):
                u, v = us[j], vs[j]
                lu, lv = labels[:, u], labels[:, v]
                pending = bits[:, j] & (lu != lv)
                if pending.any():
                    low = np.minimum(lu, lv)[pending]
                    labels[pending, u] = low
                    labels[pending, v] = low
                    changed = True
        c = ((labels == identity) & present).sum(axis=1)
        codes[lo - start:lo - start + masks.size] = _encode(l, x, c, n)
    return codes


def powerset_table(unit: Tuple[Graph, int, int, int]) -> CensusTable:
    """Census of the edge subsets of F whose bitmask lies in one range; tables of disjoint ranges merge"""
    F, start, stop, target = unit
    values, counts = np.unique(powerset_codes(F, start, stop), return_counts=True)
    table: Dict[KeyTuple, int] = {}
    for code, count in zip(values.tolist(), counts.tolist()):
        key = _decode(code, F.n)
        if 1 <= key[0] <= target:
            table[key] = int(count)
    d = host_degree(F)
    host = f"n={F.n},d={d},edges={F.num_edges}"
    return CensusTable(host=host, n=F.n, d=d, num_edges=F.num_edges, counts=table, l_max=target, engine="powerset")


def _line_graph_masks(F: Graph) -> List[int]:
    by_vertex: Dict[int, int] = defaultdict(int)
    for j, (u, v) in enumerate(F.edges):
        by_vertex[u] |= 1 << j
        by_vertex[v] |= 1 << j
    return [(by_vertex[u] | by_vertex[v]) & ~(1 << j) for j, (u, v) in enumerate(F.edges)]


def connected_edge_sets(F: Graph, l_max: int, budget: Optional[int] = None) -> Iterator[Tuple[int, int, int]]:
    """(edge mask, l, vertex mask) for every connected edge subset with 1..l_max edges"""
    enumerator = ConnectedSetEnumerator(_line_graph_masks(F), budget)
    edges = F.edges
    for e_mask, l, _ in enumerator.iter_sets(l_max, 1):
        v_mask = 0
        for j in vertices_of(e_mask):
            u, v = edges[j]
            v_mask |= (1 << u) | (1 << v)
        yield e_mask, l, v_mask


def _growth_counts(F: Graph, l_max: int, budget: Optional[int], window: Optional[int]) -> Dict[KeyTuple, int]:
    n = F.n
    pieces: Dict[int, Counter] = defaultdict(Counter)
    for _, l, v_mask in connected_edge_sets(F, l_max, budget):
        if window is not None and v_mask.bit_count() > window:
            continue
        pieces[v_mask][l] += 1

    by_min: Dict[int, List[Tuple[int, int, Counter]]] = defaultdict(list)
    for v_mask, l_counts in pieces.items():
        low = (v_mask & -v_mask).bit_length() - 1
        by_min[low].append((v_mask, v_mask.bit_count(), l_counts))

    memo: Dict[Tuple[int, int], Dict[KeyTuple, int]] = {}

    def collections(v: int, used: int) -> Dict[KeyTuple, int]:
        # vertex-disjoint piece collections whose minimum vertices are all >= v
        if v == n:
            return {(0, 0, 0): 1}
        state = (v, used >> v)
        if state in memo:
            return memo[state]
        result: Dict[KeyTuple, int] = dict(collections(v + 1, used))
        if not (used >> v) & 1:
            for v_mask, x1, l_counts in by_min.get(v, ()):
                if v_mask & used:
                    continue
                for (l, x, c), count in collections(v + 1, used | v_mask).items():
                    for l1, k1 in l_counts.items():
                        if l + l1 > l_max:
                            continue
                        key = (l + l1, x + x1, c + 1)
                        result[key] = result.get(key, 0) + count * k1
        memo[state] = result
        return result

    counts = collections(0, 0)
    counts.pop((0, 0, 0), None)
    return counts


def census(
    F: Graph,
    l_max: Optional[int] = None,
    engine: str = "auto",
    budget: Optional[int] = None,
    max_component_vertices: Optional[int] = None,
) -> CensusTable:
    """Exact counts of the subgraphs of F (no isolated vertices, l >= 1) by (l, x, c)"""
    d = host_degree(F)
    E = F.num_edges
    target = E if l_max is None else min(l_max, E)
    if target < 0:
        raise ParameterError(f"l_max must be non-negative, got {l_max}")
    if engine == "auto":
        engine = "powerset" if E <= 20 and max_component_vertices is None else "growth"
    host = f"n={F.n},d={d},edges={E}"

    if engine == "powerset":
        if max_component_vertices is not None:
            raise ParameterError("the powerset engine does not support component windows")
        if E > settings.powerset_edge_limit:
            raise InfeasibleSizeError(f"powerset census needs at most {settings.powerset_edge_limit} edges, got {E}")
        total = 1 << E
        parts = max(1, min(settings.workers, total // _CHUNK))
        bounds = [total * i // parts for i in range(parts + 1)]
        units = [(F, bounds[i], bounds[i + 1], target) for i in range(parts)]
        return functools.reduce(CensusTable.merge, map_units(powerset_table, units))

    if engine != "growth":
        raise ParameterError(f"Unknown census engine '{engine}'")

    reached = target
    while reached >= 1:
        try:
            table = _growth_counts(F, reached, budget, max_component_vertices)
            complete = reached == target
            if not complete:
                logger.warning(f"Census budget hit; table covers l <= {reached} of {target}")
            return CensusTable(
                host=host, n=F.n, d=d, num_edges=E, counts=table, l_max=reached,
                complete=complete, engine="growth", window=max_component_vertices,
            )
        except BudgetExceededError:
            reached -= 1
    return CensusTable(host=host, n=F.n, d=d, num_edges=E, counts={}, l_max=0, complete=False, engine="growth", window=max_component_vertices)


def count_monomorphisms(H: Graph, F: Graph) -> int:
    """Injective maps [n] -> [n] sending every edge of H onto an edge of F"""
    if H.n != F.n:
        raise ParameterError(f"H and F must share the vertex set, got {H.n} and {F.n}")
    core = nx.Graph(H.edges)
    x = core.number_of_nodes()
    if x == 0:
        return math.factorial(F.n)
    matcher = GraphMatcher(F.to_networkx(), core)
    core_maps = sum(1 for _ in matcher.subgraph_monomorphisms_iter())
    return core_maps * math.factorial(F.n - x)


def count_extensions(H: Graph, spec: FamilySpec, n: int, F: Optional[Graph] = None, aut: Optional[int] = None) -> int:
    """Number of members of F_n containing H, as mon(H -> F) / |Aut(F)|"""
    if n > settings.extension_limit:
        raise InfeasibleSizeError(f"exact extension counting needs n <= {settings.extension_limit}, got n={n}")
    F = F or build_family(spec, n)
    aut = aut or automorphism_count(F, spec=spec)
    mon = count_monomorphisms(H, F)
    if mon % aut:
        raise ConsistencyError(f"mon(H->F)={mon} is not divisible by |Aut(F)|={aut}")
    return mon // aut


def popcount64(values: np.ndarray) -> np.ndarray:
    as_bytes = np.ascontiguousarray(values, dtype=np.uint64).view(np.uint8)
    return np.unpackbits(as_bytes).reshape(-1, 64).sum(axis=1)


class CopyUniverse:
    """Every member of F_n as a bitmask over the N vertex pairs (n <= 10)"""

    def __init__(self, F: Graph, masks: np.ndarray, aut: int):
        self.F = F
        self.n = F.n
        self.masks = masks
        self.aut = aut

    @classmethod
    def build(cls, F: Graph, spec: Optional[FamilySpec] = None, limit: Optional[int] = None) -> "CopyUniverse":
        cap = limit or settings.universe_limit
        n = F.n
        if n > cap:
            raise InfeasibleSizeError(f"copy universe needs n <= {cap}, got n={n}")
        aut = automorphism_count(F, spec=spec)
        eu = np.array([u for u, _ in F.edges], dtype=np.int64)
        ev = np.array([v for _, v in F.edges], dtype=np.int64)
        transitive = is_vertex_transitive(F)
        # vertex-transitive hosts: every copy is reached with vertex 0 fixed
        tail = range(1, n) if transitive else range(n)
        perms = itertools.permutations(tail)

        found = []
        while True:
            block = list(itertools.islice(perms, _CHUNK))
            if not block:
                break
            P = np.array(block, dtype=np.int64)
            if transitive:
                P = np.hstack([np.zeros((P.shape[0], 1), dtype=np.int64), P])
            a, b = P[:, eu], P[:, ev]
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            idx = lo * n - lo * (lo + 1) // 2 + (hi - lo - 1)
            bits = np.left_shift(np.uint64(1), idx.astype(np.uint64))
            found.append(np.unique(np.bitwise_or.reduce(bits, axis=1)))
        masks = np.unique(np.concatenate(found)) if found else np.zeros(0, dtype=np.uint64)

        expected = math.factorial(n) // aut
        if masks.size != expected:
            raise ConsistencyError(f"copy universe has {masks.size} members, expected n!/|Aut| = {expected}")
        logger.info(f"Built copy universe with {masks.size} members", n=n)
        return cls(F, masks, aut)

    @property
    def size(self) -> int:
        return int(self.masks.size)

    def mask_of(self, G: Graph) -> int:
        mask = 0
        for u, v in G.edges:
            mask |= 1 << pair_index(u, v, self.n)
        return mask

    def graph_of(self, mask: int) -> Graph:
        rows, cols = np.triu_indices(self.n, 1)
        idx = [i for i in range(rows.size) if (mask >> i) & 1]
        return Graph.trusted(self.n, zip(rows[idx].tolist(), cols[idx].tolist()))

    def containing(self, H: Graph) -> int:
        h = np.uint64(self.mask_of(H))
        return int(np.count_nonzero((self.masks & h) == h))

    def overlaps(self, G: Graph) -> np.ndarray:
        """|F' intersect G| for every member F'"""
        return popcount64(self.masks & np.uint64(self.mask_of(G)))

    def within(self, host: Graph) -> np.ndarray:
        """Members contained in the host"""
        outside = np.uint64(~self.mask_of(host) & ((1 << 64) - 1))
        return self.masks[(self.masks & outside) == 0]


def superset_sums(hist: np.ndarray, width: int) -> np.ndarray:
    """g[S] = sum of hist[T] over T containing S"""
    g = hist.astype(np.int64).copy()
    for j in range(width):
        view = g.reshape(-1, 2, 1 << j)
        view[:, 0, :] += view[:, 1, :]
    return g


def extensions_per_subgraph(universe: CopyUniverse, F: Graph) -> np.ndarray:
    """Number of members containing H, for every edge subset H of F (indexed over F.edges)"""
    E = F.num_edges
    local = np.zeros(universe.size, dtype=np.int64)
    for j, (u, v) in enumerate(F.edges):
        bit = (universe.masks >> np.uint64(pair_index(u, v, F.n))) & np.uint64(1)
        local |= bit.astype(np.int64) << j
    hist = np.bincount(local, minlength=1 << E)
    return superset_sums(hist, E)


def extension_profile(F: Graph, spec: Optional[FamilySpec] = None, universe: Optional[CopyUniverse] = None) -> ExtensionProfile:
    """Per (l, x, c) bucket: total and maximum number of members extending a subgraph"""
    universe = universe or CopyUniverse.build(F, spec)
    ext = extensions_per_subgraph(universe, F)
    codes = powerset_codes(F)
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    values, starts = np.unique(sorted_codes, return_index=True)
    mass = np.add.reduceat(ext[order], starts)
    peak = np.maximum.reduceat(ext[order], starts)
    profile = ExtensionProfile(family=spec.label if spec else "custom", n=F.n, copies=universe.size)
    for code, m, p in zip(values.tolist(), mass.tolist(), peak.tolist()):
        key = _decode(code, F.n)
        if key[0] == 0:
            continue
        profile.mass[key] = int(m)
        profile.maximum[key] = int(p)
    return profile


def spread_profile(spec: FamilySpec, n: int, mode: str = "exhaustive", trials: int = 200, seed: int = 0) -> SpreadReport:
    """Worst ratio |{F' containing H}| / |F_n| and implied per-edge spread over subgraphs H of F"""
    F = build_family(spec, n)
    d = spec.degree
    scale = n ** (2.0 / d)
    if mode == "exhaustive":
        universe = CopyUniverse.build(F, spec)
        ext = extensions_per_subgraph(universe, F)
        E = F.num_edges
        masks = np.arange(1 << E, dtype=np.int64)
        levels = popcount64(masks.astype(np.uint64))
        ratio = ext / universe.size
        with np.errstate(divide="ignore"):
            per_edge = np.where(levels > 0, np.exp(np.log(ratio) / np.maximum(levels, 1)) * scale, 0.0)
        worst = int(np.argmax(per_edge))
        per_level = {
            int(l): float(per_edge[levels == l].max())
            for l in range(1, E + 1)
        }
        return SpreadReport(
            family=spec.label, n=n, mode=mode, examined=int(masks.size - 1), copies=universe.size,
            worst_ratio=float(ratio[1:].max()), worst_per_edge=float(per_edge[worst]),
            worst_subgraph=[F.edges[j] for j in vertices_of(worst)], per_level=per_level,
        )
    if mode != "sampled":
        raise ParameterError(f"Unknown spread mode '{mode}'")

    aut = automorphism_count(F, spec=spec)
    copies = math.factorial(n) // aut
    stream = SeedStream(seed)
    worst_ratio, worst_per_edge, worst_edges = 0.0, 0.0, []
    per_level: Dict[int, float] = {}
    for t in range(trials):
        rng = stream.child("spread", t).rng
        keep = rng.random(F.num_edges) < rng.random()
        edges = [e for e, k in zip(F.edges, keep) if k]
        if not edges:
            continue
        H = Graph.trusted(n, edges)
        ratio = count_extensions(H, spec, n, F=F, aut=aut) / copies
        spread = ratio ** (1.0 / len(edges)) * scale
        per_level[len(edges)] = max(per_level.get(len(edges), 0.0), spread)
        worst_ratio = max(worst_ratio, ratio)
        if spread > worst_per_edge:
            worst_per_edge, worst_edges = spread, edges
    return SpreadReport(
        family=spec.label, n=n, mode=mode, examined=trials, copies=copies, worst_ratio=worst_ratio,
        worst_per_edge=worst_per_edge, worst_subgraph=worst_edges, per_level=dict(sorted(per_level.items())),
    )


def log_copies(spec: FamilySpec, n: int, aut: Optional[int] = None) -> float:
    """ln |F_n| = ln n! - ln |Aut(F)|"""
    if aut is None:
        aut = automorphism_count(build_family(spec, n), spec=spec)
    return float(gammaln(n + 1)) - math.log(aut)


def expectation_threshold(spec: FamilySpec, n: int, aut: Optional[int] = None) -> float:
    """p solving (n!/|Aut(F)|) p^(dn/2) = 1/2, evaluated in log space"""
    f = spec.degree * n / 2.0
    return math.exp((-log_copies(spec, n, aut) - math.log(2.0)) / f)
