"""
Random matching rule between diamonds and positions, and the smoothing transform
that relocates cut pieces into matched diamonds
"""

from typing import Dict, List, Sequence, Set, Tuple

import networkx as nx
import numpy as np
import structlog

from ..core.exceptions import ConsistencyError, ParameterError, SmoothingRefusedError
from ..models.fragment import DiamondLayout, Embedding, MatchingRule, PieceCut, Relocation, SmoothingResult
from ..models.graph import Edge, FamilySpec, Graph
from .pieces import long_stretches, path_square_edges

logger = structlog.get_logger(__name__)


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def matching_rule(chi: int, n: int, beta: float, seed: int) -> MatchingRule:
    """Bipartite graph on diamonds x positions, each pair present with probability beta"""
    if not 0.0 <= beta <= 1.0:
        raise ParameterError(f"beta must lie in [0, 1], got {beta}")
    rng = np.random.default_rng(seed)
    adjacency = [np.flatnonzero(rng.random(n) < beta).tolist() for _ in range(chi)]
    return MatchingRule(chi=chi, n=n, beta=beta, seed=seed, adjacency=adjacency)


def diamond_edges(diamond: Sequence[int]) -> List[Edge]:
    u1, u2, u3, u4 = diamond
    return [_edge(a, b) for a, b in ((u1, u2), (u1, u3), (u2, u3), (u2, u4), (u3, u4))]


def cycle_edges(order: Sequence[int], k: int = 2) -> Set[Edge]:
    n = len(order)
    return {_edge(order[i], order[(i + s) % n]) for i in range(n) for s in range(1, k + 1)}


def eligible_diamonds(H: Set[Edge], n: int, layout: DiamondLayout, removed: Set[int]) -> List[int]:
    """Diamonds present in H whose component loses no piece"""
    component_of: Dict[int, int] = {}
    for idx, component in enumerate(Graph.trusted(n, H).components()):
        for v in component:
            component_of[v] = idx
    touched = {component_of[v] for v in removed if v in component_of}
    out = []
    for j, diamond in enumerate(layout.diamonds):
        if not all(e in H for e in diamond_edges(diamond)):
            continue
        if component_of[diamond[0]] in touched:
            continue
        out.append(j)
    return out


def relocate(order: Sequence[int], moves: Sequence[Tuple[List[int], Sequence[int]]]) -> List[int]:
    """Remove every moved piece, then insert each between the middle vertices of its diamond"""
    moving = {v for piece, _ in moves for v in piece}
    out = [v for v in order if v not in moving]
    for piece, (u1, u2, u3, u4) in moves:
        i, j = out.index(u2), out.index(u3)
        m = len(out)
        if (i + 1) % m == j:
            out[i + 1:i + 1] = list(piece)
        elif (j + 1) % m == i:
            out[j + 1:j + 1] = list(reversed(piece))
        else:
            raise ConsistencyError(f"diamond {(u1, u2, u3, u4)} is not contiguous in the order")
    return out


def smooth(
    cut: PieceCut,
    layout: DiamondLayout,
    rule: MatchingRule,
    found: Embedding,
    planted: Sequence[int],
) -> SmoothingResult:
    """
    Move every cut piece into a distinct eligible diamond chosen by a maximum matching

    The smoothed fragment has the same (l, x, c) as the source; the witness is the
    found copy with the same relocation applied and lies inside H' plus the found
    copy's edges outside H.
    """
    n = layout.n
    H = set(cut.source)
    found_order = list(found.perm)
    pieces = cut.pieces
    if not pieces:
        return SmoothingResult(smoothed=sorted(H), order=list(planted), witness=found)

    removed = {v for piece in pieces for v in piece}
    eligible = eligible_diamonds(H, n, layout, removed)
    position = {v: i for i, v in enumerate(planted)}

    bipartite = nx.Graph()
    tops = [("p", i) for i in range(len(pieces))]
    bipartite.add_nodes_from(tops, bipartite=0)
    bipartite.add_nodes_from((("d", j) for j in eligible), bipartite=1)
    for i, piece in enumerate(pieces):
        for j in eligible:
            if rule.allows(j, position[piece[0]]):
                bipartite.add_edge(("p", i), ("d", j))
    matching = nx.bipartite.hopcroft_karp_matching(bipartite, top_nodes=tops)
    unmatched = [i for i in range(len(pieces)) if ("p", i) not in matching]
    if unmatched:
        raise SmoothingRefusedError(
            f"matching covers {len(pieces) - len(unmatched)} of {len(pieces)} pieces over {len(eligible)} eligible diamonds"
        )

    relocations: List[Relocation] = []
    moves = []
    smoothed = set(cut.core)
    i = 0
    for r, run in enumerate(cut.runs):
        for t, piece in enumerate(run.pieces):
            j = matching[("p", i)][1]
            diamond = layout.diamonds[j]
            u1, u2, u3, u4 = diamond
            smoothed -= {_edge(u1, u3), _edge(u2, u3), _edge(u2, u4)}
            smoothed |= path_square_edges([u1, u2] + piece + [u3, u4])
            relocations.append(Relocation(
                piece=piece, diamond=j, glue=run.glue, run_index=r, piece_index=t,
                source_position=position[piece[0]],
            ))
            moves.append((piece, diamond))
            i += 1

    before = Graph.trusted(n, H).summary()
    after = Graph.trusted(n, smoothed).summary()
    if before != after:
        raise ConsistencyError(f"smoothing changed (l, x, c) from {before} to {after}")

    smoothed_order = relocate(planted, moves)
    witness_order = relocate(found_order, moves)
    witness_edges = cycle_edges(witness_order)
    if not smoothed <= witness_edges:
        raise ConsistencyError("smoothed fragment is not contained in the witness copy")
    if not witness_edges <= smoothed | (cycle_edges(found_order) - H):
        raise ConsistencyError("witness copy uses edges outside H' and the found copy")
    if not smoothed <= cycle_edges(smoothed_order):
        raise ConsistencyError("smoothed fragment is not contained in the relocated planted copy")

    violations = [
        f"closed stretch of {len(s)} vertices starting at {s[0]}"
        for s in long_stretches(smoothed_order, smoothed, cut.threshold, layout.vertices())
    ]
    root = found_order[0]
    k = witness_order.index(root)
    witness = Embedding(family=FamilySpec.square_of_cycle(), perm=tuple(witness_order[k:] + witness_order[:k]))
    logger.debug(f"Smoothed {len(pieces)} pieces into {len(eligible)} eligible diamonds", violations=len(violations))
    return SmoothingResult(
        smoothed=sorted(smoothed), relocations=relocations, order=smoothed_order, witness=witness,
        eligible=eligible, conserved=True, violations=violations,
    )
