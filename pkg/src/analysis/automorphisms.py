"""
Automorphism counting by VF2 permutation search, with a shortcut table for known families
"""

from typing import Dict, Iterable, Iterator, Optional, Sequence

import networkx as nx
import structlog
from networkx.algorithms.isomorphism import GraphMatcher

from ..core.config import settings
from ..core.exceptions import InfeasibleSizeError
from ..models.graph import Edge, FamilyKind, FamilySpec, Graph

logger = structlog.get_logger(__name__)


def shortcut_automorphisms(spec: FamilySpec, n: int) -> Optional[int]:
    """Closed-form |Aut| for families where it is known, else None"""
    if spec.kind == FamilyKind.POWER_OF_CYCLE and n >= 2 * spec.k + 3:
        return 2 * n
    if spec.kind == FamilyKind.TOROIDAL_GRID:
        m, q = spec.m_rows, n // spec.m_rows
        if m == 4 and q == 4:
            return None
        return 4 * m * q * (2 if m == q else 1)
    if spec.kind == FamilyKind.OVERLAPPING_FOUR_CYCLES:
        half = n // 2
        if half == 3 or half >= 5:
            return 2 * n
    return None


def iter_automorphisms(F: Graph, limit: Optional[int] = None) -> Iterator[Dict[int, int]]:
    """All automorphisms of F as vertex maps"""
    cap = limit or settings.automorphism_limit
    if F.n > cap:
        raise InfeasibleSizeError(f"brute-force automorphism search needs n <= {cap}, got n={F.n}")
    g = F.to_networkx()
    yield from GraphMatcher(g, g).isomorphisms_iter()


def automorphism_count(F: Graph, limit: Optional[int] = None, spec: Optional[FamilySpec] = None) -> int:
    """Exact |Aut(F)| by permutation search, or the shortcut table above the size guard"""
    cap = limit or settings.automorphism_limit
    if F.n <= cap:
        count = sum(1 for _ in iter_automorphisms(F, cap))
        logger.debug(f"Brute-force automorphism count {count}", n=F.n)
        return count
    if spec is not None:
        shortcut = shortcut_automorphisms(spec, F.n)
        if shortcut is not None:
            return shortcut
    raise InfeasibleSizeError(f"|Aut| needs n <= {cap} or a known family shortcut, got n={F.n}")


def fixing_automorphism_count(vertices: Iterable[int], edges: Iterable[Edge], fixed: Iterable[int]) -> int:
    """Automorphisms of the graph (vertices, edges) that fix every vertex of `fixed`"""
    pinned = set(fixed)
    g = nx.Graph()
    for v in vertices:
        g.add_node(v, pin=v if v in pinned else -1)
    g.add_edges_from(edges)
    matcher = GraphMatcher(g, g, node_match=lambda a, b: a["pin"] == b["pin"])
    return sum(1 for _ in matcher.isomorphisms_iter())


def vertex_orbit(F: Graph, v: int = 0, limit: Optional[int] = None) -> set:
    return {mapping[v] for mapping in iter_automorphisms(F, limit)}


def is_vertex_transitive(F: Graph, limit: Optional[int] = None) -> bool:
    if F.n == 0:
        return True
    return len(vertex_orbit(F, 0, limit)) == F.n


def is_automorphism(F: Graph, perm: Sequence[int]) -> bool:
    """Whether v -> perm[v] maps F onto itself"""
    edges = F.edge_set
    for u, v in F.edges:
        a, b = perm[u], perm[v]
        if ((a, b) if a < b else (b, a)) not in edges:
            return False
    return True
