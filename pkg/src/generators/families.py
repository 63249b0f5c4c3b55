"""
Canonical instances of the d-regular families
"""

from math import isqrt
from typing import List, Sequence, Set, Tuple

import structlog

from ..core.exceptions import ParameterError
from ..models.graph import Edge, FamilyKind, FamilySpec, Graph, LabeledCopy

logger = structlog.get_logger(__name__)


def _circulant(n: int, offsets: Sequence[int]) -> Set[Edge]:
    edges: Set[Edge] = set()
    for i in range(n):
        for s in offsets:
            j = (i + s) % n
            edges.add((i, j) if i < j else (j, i))
    return edges


def _toroidal_grid(n: int, m_rows: int) -> Set[Edge]:
    # column-major: column c holds the ring c*m .. c*m+m-1
    cols = n // m_rows
    edges: Set[Edge] = set()
    for c in range(cols):
        for r in range(m_rows):
            v = c * m_rows + r
            along = c * m_rows + (r + 1) % m_rows
            across = ((c + 1) % cols) * m_rows + r
            for w in (along, across):
                edges.add((v, w) if v < w else (w, v))
    return edges


def _overlapping_four_cycles(n: int) -> Set[Edge]:
    # n/2 rungs (2i, 2i+1); consecutive rungs close a 4-cycle
    half = n // 2
    edges: Set[Edge] = set()
    for i in range(half):
        a, b = 2 * i, 2 * i + 1
        a_next, b_next = (2 * (i + 1)) % n, (2 * (i + 1) + 1) % n
        for u, v in ((a, b), (a, a_next), (b, b_next)):
            edges.add((u, v) if u < v else (v, u))
    return edges


def build_family(spec: FamilySpec, n: int) -> Graph:
    """Canonical, deterministic d-regular instance of a family on [n]"""
    spec.check(n)

    if spec.kind == FamilyKind.POWER_OF_CYCLE:
        edges = _circulant(n, range(1, spec.k + 1))
    elif spec.kind == FamilyKind.TOROIDAL_GRID:
        edges = _toroidal_grid(n, spec.m_rows)
    elif spec.kind == FamilyKind.SQUARE_LATTICE:
        # row-major grid of width b, boundary completed by the helical wrap
        b = isqrt(n)
        edges = _circulant(n, (1, b))
    elif spec.kind == FamilyKind.TRIANGULAR_LATTICE:
        b = isqrt(n)
        edges = _circulant(n, (1, b, b + 1))
    elif spec.kind == FamilyKind.OVERLAPPING_FOUR_CYCLES:
        edges = _overlapping_four_cycles(n)
    elif spec.kind == FamilyKind.RANDOM_REGULAR:
        from .random_graphs import random_regular

        return random_regular(n, spec.d, spec.seed or 0)
    else:
        raise ParameterError(f"Unsupported family kind: {spec.kind}")

    graph = Graph.trusted(n, edges, d=spec.degree)
    if not graph.is_regular(spec.degree):
        raise ParameterError(f"{spec.label} on n={n} is not {spec.degree}-regular")
    return graph


def _check_permutation(perm: Sequence[int], n: int) -> None:
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise ParameterError(f"not a bijection on [{n}]: {list(perm)[:12]}")


def relabel(F: Graph, perm: Sequence[int]) -> Graph:
    """Image of F under the vertex map v -> perm[v]"""
    _check_permutation(perm, F.n)
    mapped: List[Edge] = []
    for u, v in F.edges:
        a, b = perm[u], perm[v]
        mapped.append((a, b) if a < b else (b, a))
    return Graph.trusted(F.n, mapped, d=F.d)


def invert(perm: Sequence[int]) -> List[int]:
    inverse = [0] * len(perm)
    for i, v in enumerate(perm):
        inverse[v] = i
    return inverse


def canonical_copy(spec: FamilySpec, n: int) -> LabeledCopy:
    """The identity member of F_n, rooted at 0 with positive orientation"""
    return LabeledCopy(base=spec, order=tuple(range(n)), root=0, orientation=1)


def realize_copy(copy: LabeledCopy) -> Graph:
    """Graph of a labeled copy"""
    return relabel(build_family(copy.base, copy.n), copy.order)


def cyclic_order_graph(order: Sequence[int], k: int = 2) -> Graph:
    """k-th power of the Hamilton cycle visiting vertices in the given cyclic order"""
    n = len(order)
    edges: Set[Tuple[int, int]] = set()
    for i in range(n):
        for s in range(1, k + 1):
            u, v = order[i], order[(i + s) % n]
            edges.add((u, v) if u < v else (v, u))
    return Graph.trusted(n, edges, d=2 * k if n >= 2 * k + 1 else None)
