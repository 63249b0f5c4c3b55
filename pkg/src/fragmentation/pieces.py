"""
Closed runs of a fragment along a cyclic order and the piece cutting that shortens them
"""

from typing import Iterable, List, Optional, Sequence, Set, Tuple

import structlog

from ..core.exceptions import ConsistencyError, ParameterError
from ..models.fragment import CutRun, DiamondLayout, PieceCut
from ..models.graph import Edge

logger = structlog.get_logger(__name__)


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def closed_runs(order: Sequence[int], edges: Set[Edge], k: int = 2, min_vertices: int = 3) -> List[Tuple[int, int]]:
    """
    Inclusion-maximal windows of the cyclic order whose k-th power lies in `edges`

    Returns (start position, length) pairs sorted by start. In a k-th power of a
    cycle these windows are exactly the maximal closed subgraphs of the fragment.
    """
    n = len(order)
    if n == 0:
        return []
    if all(_edge(order[i], order[(i + s) % n]) in edges for i in range(n) for s in range(1, k + 1)):
        return [(0, n)]

    def low(e: int) -> int:
        for s in range(1, k + 1):
            if _edge(order[(e - s) % n], order[e % n]) not in edges:
                return e - s + 1
        return e - n + 1

    s_min = [0] * (2 * n + 1)
    for e in range(1, 2 * n + 1):
        s_min[e] = max(s_min[e - 1], low(e), e - n + 1)

    runs = []
    for e in range(n, 2 * n):
        if s_min[e + 1] > s_min[e]:
            length = e - s_min[e] + 1
            if length >= min_vertices:
                runs.append((s_min[e] % n, length))
    return sorted(runs)


def run_histogram(order: Sequence[int], edges: Iterable[Edge], k: int = 2) -> dict:
    """Number of maximal closed runs by vertex count"""
    histogram: dict = {}
    for _, length in closed_runs(order, set(edges), k):
        histogram[length] = histogram.get(length, 0) + 1
    return histogram


def diamond_free_stretches(run: List[int], blocked: Set[int]) -> List[List[int]]:
    """Maximal sub-runs avoiding diamond vertices"""
    out: List[List[int]] = []
    current: List[int] = []
    for v in run:
        if v in blocked:
            if current:
                out.append(current)
            current = []
        else:
            current.append(v)
    if current:
        out.append(current)
    return out


def long_stretches(order: Sequence[int], edges: Set[Edge], threshold: int, blocked: Iterable[int] = ()) -> List[List[int]]:
    """Diamond-free stretches of maximal closed runs with at least threshold vertices"""
    n = len(order)
    blocked = set(blocked)
    out: List[List[int]] = []
    for start, length in closed_runs(order, edges, 2):
        if length < threshold:
            continue
        run = [order[(start + a) % n] for a in range(length)]
        out.extend(s for s in diamond_free_stretches(run, blocked) if len(s) >= threshold)
    return out


def path_square_edges(vertices: Sequence[int]) -> Set[Edge]:
    """Edges of the square of the path visiting the vertices in order"""
    return {
        _edge(vertices[i], vertices[j])
        for i in range(len(vertices))
        for j in range(i + 1, min(i + 3, len(vertices)))
    }


def cut_pieces(
    H: Iterable[Edge],
    order: Sequence[int],
    mu: int,
    threshold: int,
    layout: Optional[DiamondLayout] = None,
) -> PieceCut:
    """
    Cut pieces of exactly mu vertices out of every long closed run of H

    A stretch v1..vh with h >= threshold keeps v1 v2 and a tail of 2..mu+1
    vertices; the j = floor((h-4)/mu) windows in between become pieces and the
    tail is glued to v1 v2 as a square of a path.
    """
    if mu < 1:
        raise ParameterError(f"mu must be positive, got {mu}")
    if threshold < mu + 4:
        raise ParameterError(f"threshold {threshold} is below mu+4 = {mu + 4}")
    source = sorted(set(_edge(u, v) for u, v in H))
    edges = set(source)
    blocked = set(layout.vertices()) if layout is not None else set()

    cut_runs: List[CutRun] = []
    for stretch in long_stretches(order, edges, threshold, blocked):
        j = (len(stretch) - 4) // mu
        pieces = [stretch[2 + i * mu: 2 + (i + 1) * mu] for i in range(j)]
        head, tail = stretch[:2], stretch[2 + j * mu:]
        removed = {v for piece in pieces for v in piece}
        edges = {e for e in edges if e[0] not in removed and e[1] not in removed}
        edges |= path_square_edges(head + tail[:2])
        cut_runs.append(CutRun(stretch=stretch, pieces=pieces, retained_head=head, retained_tail=tail))

    cut = PieceCut(source=source, core=sorted(edges), order=list(order), mu=mu, threshold=threshold, runs=cut_runs)
    s = len(cut.pieces)
    if s and not s < 2 * len(source) / mu:
        raise ConsistencyError(f"{s} pieces from {len(source)} edges violates s < 2l/mu")
    if s:
        logger.debug(f"Cut {s} pieces of {mu} vertices from {len(cut_runs)} stretches")
    return cut
