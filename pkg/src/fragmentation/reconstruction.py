"""
Encoding of a planted copy relative to its smoothed fragment, the inverse decoding,
and the exhaustive pre-image count behind the audit
"""

import functools
import itertools
import math
from collections import deque
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import structlog
from pydantic import BaseModel, ConfigDict, Field

from ..analysis.bounds import log_binom, log_factorial
from ..core.config import settings
from ..core.exceptions import ConsistencyError, DecodeError, InfeasibleSizeError
from ..models.fragment import DiamondLayout, Embedding, MatchingRule, ReconstructionTuple, SmoothingResult
from ..models.graph import Edge, FamilySpec, Graph
from .matching import cycle_edges

logger = structlog.get_logger(__name__)

_CODE = {-2: 0, -1: 1, 1: 2, 2: 3}
_STEP = {code: step for step, code in _CODE.items()}


class ReconstructionContext(BaseModel):
    """What encoder and decoder share: the smoothed fragment S, diamonds, matching rule and piece length"""
    model_config = ConfigDict(frozen=True)

    n: int
    S: Tuple[Edge, ...]
    layout: DiamondLayout
    rule: MatchingRule
    mu: int

    @property
    def root(self) -> int:
        return self.layout.root


@functools.lru_cache(maxsize=64)
def _structure(n: int, S: Tuple[Edge, ...]) -> Tuple[List[List[int]], List[FrozenSet[int]]]:
    """Components of S and the vertices S does not touch, ordered by smallest vertex, with the adjacency of S"""
    graph = Graph.trusted(n, S)
    components = graph.components()
    touched = {v for c in components for v in c}
    units = sorted(components + [[v] for v in range(n) if v not in touched], key=lambda unit: unit[0])
    return units, graph.adjacency


def _rotate(order: Sequence[int], v: int) -> List[int]:
    i = list(order).index(v)
    return list(order[i:]) + list(order[:i])


def _step(a: int, b: int, n: int) -> int:
    """Signed cyclic distance from position a to position b"""
    return (b - a + n // 2) % n - n // 2


def _tree(anchor: int, adjacency: Sequence[FrozenSet[int]]) -> List[Edge]:
    """BFS tree edges (parent, child) from the anchor, neighbours taken in increasing order"""
    seen = {anchor}
    queue = deque([anchor])
    out = []
    while queue:
        u = queue.popleft()
        for w in sorted(adjacency[u]):
            if w not in seen:
                seen.add(w)
                queue.append(w)
                out.append((u, w))
    return out


def _layout(anchor: int, codes: Sequence[int], adjacency: Sequence[FrozenSet[int]]) -> Dict[int, int]:
    """Offsets from the anchor of every vertex in its component"""
    tree = _tree(anchor, adjacency)
    if len(codes) != len(tree):
        raise DecodeError(f"component rooted at {anchor} needs {len(tree)} codes, got {len(codes)}")
    relative = {anchor: 0}
    for (u, w), code in zip(tree, codes):
        if code not in _STEP:
            raise DecodeError(f"code {code} outside [4]")
        relative[w] = relative[u] + _STEP[code]
    return relative


def encode_preimage(F: Embedding, smoothing: SmoothingResult, context: ReconstructionContext) -> ReconstructionTuple:
    """Tuple from which decode_preimage rebuilds F given only the context"""
    n = context.n
    S = set(context.S)
    if F.perm[0] != context.root:
        raise ConsistencyError(f"planted copy is rooted at {F.perm[0]}, context root is {context.root}")
    order = _rotate(smoothing.order, context.root)
    if not S <= cycle_edges(order):
        raise ConsistencyError("smoothed fragment is not inside the smoothed copy")
    position = {v: i for i, v in enumerate(order)}
    units, adjacency = _structure(n, tuple(sorted(S)))

    alpha = []
    anchors = []
    for index, unit in enumerate(units):
        anchor = min(unit, key=position.__getitem__)
        anchors.append((position[anchor], index))
        if len(unit) == 1:
            continue
        codes = []
        for u, w in _tree(anchor, adjacency):
            step = _step(position[u], position[w], n)
            if step not in _CODE:
                raise ConsistencyError(f"edge {(u, w)} spans {step} positions")
            codes.append(_CODE[step])
        alpha.append((anchor, tuple(codes)))

    glues = sorted({r.glue for r in smoothing.relocations})
    glue_index = {g: t for t, g in enumerate(glues)}
    counts = [0] * len(glues)
    for r in smoothing.relocations:
        counts[glue_index[r.glue]] += 1
    return ReconstructionTuple(
        A=tuple(v for r in smoothing.relocations for v in (r.piece[0], r.piece[-1])),
        A_prime=tuple(glues),
        alpha=tuple(sorted(alpha)),
        tau1=tuple(glue_index[r.glue] for r in smoothing.relocations),
        tau2=tuple(r.piece_index for r in smoothing.relocations),
        rho=tuple(r.diamond for r in smoothing.relocations),
        f=tuple(context.mu * c for c in counts),
        pi=tuple(index for _, index in sorted(anchors)),
    )


def _check_shape(x: ReconstructionTuple, context: ReconstructionContext) -> int:
    a = len(x.rho)
    if len(x.A) != 2 * a or len(x.tau1) != a or len(x.tau2) != a:
        raise DecodeError(f"A, tau1, tau2 and rho disagree on the number of moved pieces ({a})")
    if len(set(x.rho)) != a:
        raise DecodeError(f"rho is not injective: {list(x.rho)}")
    if any(not 0 <= j < context.layout.chi for j in x.rho):
        raise DecodeError(f"rho leaves the diamond range [0, {context.layout.chi})")
    if any(not 0 <= t < len(x.A_prime) for t in x.tau1):
        raise DecodeError("tau1 points outside A'")
    if len(x.f) != len(x.A_prime):
        raise DecodeError(f"f has {len(x.f)} parts for {len(x.A_prime)} glue points")
    if any(part <= 0 or part % context.mu for part in x.f) or sum(x.f) != context.mu * a:
        raise DecodeError(f"f = {list(x.f)} is not a composition of {context.mu * a} into multiples of {context.mu}")
    for t, part in enumerate(x.f):
        if part != context.mu * sum(1 for s in x.tau1 if s == t):
            raise DecodeError(f"glue point {t} receives a different length than f records")
    return a


def _smoothed_order(x: ReconstructionTuple, context: ReconstructionContext) -> List[int]:
    """Pack the components of S along the cycle in pi order, each laid out by its alpha codes"""
    n = context.n
    S = set(context.S)
    units, adjacency = _structure(n, tuple(sorted(S)))
    if sorted(x.pi) != list(range(len(units))):
        raise DecodeError(f"pi is not a permutation of the {len(units)} components of S")
    unit_of = {v: i for i, unit in enumerate(units) for v in unit}

    anchors: Dict[int, int] = {}
    layouts: Dict[int, Dict[int, int]] = {}
    for anchor, codes in x.alpha:
        if anchor not in unit_of:
            raise DecodeError(f"anchor {anchor} is not a vertex")
        i = unit_of[anchor]
        if i in layouts or len(units[i]) == 1:
            raise DecodeError(f"component of {anchor} has no edge or is coded twice")
        anchors[i] = anchor
        layouts[i] = _layout(anchor, codes, adjacency)
    missing = [units[i][0] for i in range(len(units)) if len(units[i]) > 1 and i not in layouts]
    if missing:
        raise DecodeError(f"components containing {missing} have no codes")

    cells: List[Optional[int]] = [None] * n
    cursor = 0
    for i in x.pi:
        while cursor < n and cells[cursor] is not None:
            cursor += 1
        if cursor == n:
            raise DecodeError("components overflow the cycle")
        for v, rel in layouts.get(i, {units[i][0]: 0}).items():
            p = (cursor + rel) % n
            if cells[p] is not None:
                raise DecodeError(f"vertex {v} lands on occupied position {p}")
            cells[p] = v

    order = [v for v in cells if v is not None]
    if len(order) != n or order[0] != context.root:
        raise DecodeError(f"packed order does not start at the root {context.root}")
    position = {v: p for p, v in enumerate(order)}
    for i, anchor in anchors.items():
        if min(position[v] for v in units[i]) != position[anchor]:
            raise DecodeError(f"anchor {anchor} is not the leftmost vertex of its component")
    if not S <= cycle_edges(order):
        raise DecodeError("rebuilt order does not contain the smoothed fragment")
    return order


def decode_preimage(x: ReconstructionTuple, context: ReconstructionContext) -> Embedding:
    """Rebuild the planted copy from its tuple and the shared context"""
    a = _check_shape(x, context)
    order = _smoothed_order(x, context)
    mu = context.mu

    pieces: List[List[int]] = []
    for i in range(a):
        u1, u2, u3, u4 = context.layout.diamonds[x.rho[i]]
        p = order.index(u2)
        piece = [order[(p + 1 + s) % len(order)] for s in range(mu)]
        if order[(p + 1 + mu) % len(order)] != u3:
            raise DecodeError(f"diamond {x.rho[i]} does not hold a piece of {mu} vertices")
        if (piece[0], piece[-1]) != (x.A[2 * i], x.A[2 * i + 1]):
            raise DecodeError(f"piece in diamond {x.rho[i]} does not match its recorded ends")
        pieces.append(piece)

    moving = {v for piece in pieces for v in piece}
    out = [v for v in order if v not in moving]
    for t, glue in enumerate(x.A_prime):
        members = sorted((x.tau2[i], i) for i in range(a) if x.tau1[i] == t)
        block = [v for _, i in members for v in pieces[i]]
        if glue in moving or glue not in out:
            raise DecodeError(f"glue vertex {glue} is missing or was moved")
        g = out.index(glue)
        out[g + 1:g + 1] = block

    out = _rotate(out, context.root)
    for j, (start, diamond) in enumerate(zip(context.layout.starts, context.layout.diamonds)):
        if tuple(out[start:start + 4]) != tuple(diamond):
            raise DecodeError(f"diamond {j} is not at its planted slot {start}")
    position = {v: i for i, v in enumerate(out)}
    for i, piece in enumerate(pieces):
        if not context.rule.allows(x.rho[i], position[piece[0]]):
            raise DecodeError(f"diamond {x.rho[i]} is not matched to position {position[piece[0]]}")
    return Embedding(family=FamilySpec.square_of_cycle(), perm=tuple(out))


def component_codes(
    unit: Sequence[int],
    adjacency: Sequence[FrozenSet[int]],
    n: int,
    anchors: Optional[Sequence[int]] = None,
) -> List[Tuple[int, Tuple[int, ...]]]:
    """
    Every (anchor, codes) pair laying the component out inside the square of an n-cycle

    Without explicit anchors the anchor must be the leftmost vertex, so every other
    vertex lands strictly to its right; explicit anchors may wrap around the cycle.
    """
    forward = anchors is None
    out: List[Tuple[int, Tuple[int, ...]]] = []
    for anchor in (unit if forward else anchors):
        tree = _tree(anchor, adjacency)

        def extend(t: int, placed: Dict[int, int], taken: Set[int], codes: List[int]) -> None:
            if t == len(tree):
                out.append((anchor, tuple(codes)))
                return
            u, w = tree[t]
            for code in sorted(_STEP):
                raw = placed[u] + _STEP[code]
                if (forward and raw <= 0) or raw % n in taken:
                    continue
                if any(y in placed and _step(raw, placed[y], n) not in _CODE for y in adjacency[w]):
                    continue
                placed[w] = raw
                taken.add(raw % n)
                codes.append(code)
                extend(t + 1, placed, taken, codes)
                codes.pop()
                taken.discard(raw % n)
                del placed[w]

        extend(0, {anchor: 0}, {0}, [])
    return out


class PreimageCount(BaseModel):
    """Tuples sharing one move record that decode to a valid copy for a fixed S"""
    l: int
    x: int
    c: int
    candidates: int
    tuples: int
    copies: int
    log_bound: float
    log_small: float


class PreimageAudit(BaseModel):
    """Pre-image counts per smoothed fragment against the counting bounds"""
    groups: int = 0
    skipped: int = 0
    max_count: int = 0
    large_violations: int = 0
    small_exceedances: int = 0
    rows: List[Dict[str, float]] = Field(default_factory=list)


def log_preimage_bounds(key: Tuple[int, int, int], n: int, l_chi: int) -> Tuple[float, float]:
    """ln of the general and the small-excess pre-image bounds for an S with key (l, x, c)"""
    l, x, c = key
    sigma = max(2 * x - 3 * c - l, 0)
    half = l_chi // 2
    base = l * math.log(64) + log_factorial(n - x + c)
    large = base + max(
        c / 6 * math.log(n) + log_binom(l_chi, min(sigma, half)),
        log_binom(l_chi, min(c + sigma, half)),
    )
    small = base + (c + sigma) * math.log(2 * l_chi) - min((c + sigma) * math.log(math.log(n)), math.log(n) / 4)
    return large, small


def count_preimages(
    x: ReconstructionTuple,
    context: ReconstructionContext,
    l_chi: int,
    limit: Optional[int] = None,
) -> PreimageCount:
    """
    Decode every (alpha, pi) choice while keeping the move record of x

    Candidates put the root's component first, anchored at the root, and anchor
    every other component at a vertex with the rest to its right. S holds the
    root's diamond, so no other component wraps past the root and no other
    choice decodes. Each decodable choice yields one smoothed order, so `tuples`
    counts the orders consistent with S and `copies` the distinct planted copies
    they rebuild.
    """
    limit = limit or settings.preimage_limit
    n = context.n
    S = tuple(sorted(set(context.S)))
    units, adjacency = _structure(n, S)
    first = next(i for i, unit in enumerate(units) if context.root in unit)
    choices = [
        component_codes(unit, adjacency, n, anchors=[context.root] if i == first else None)
        for i, unit in enumerate(units) if len(unit) > 1
    ]
    rest = [i for i in range(len(units)) if i != first]
    candidates = math.factorial(len(rest)) * math.prod(len(options) for options in choices)
    if candidates > limit:
        raise InfeasibleSizeError(f"pre-image count needs {candidates} decodings, limit is {limit}")

    tuples = 0
    copies = set()
    for alpha in itertools.product(*choices):
        for tail in itertools.permutations(rest):
            candidate = x.model_copy(update={"alpha": tuple(sorted(alpha)), "pi": (first,) + tail})
            try:
                decoded = decode_preimage(candidate, context)
            except DecodeError:
                continue
            tuples += 1
            copies.add(decoded.perm)

    summary = Graph.trusted(n, S).summary()
    key = (summary["l"], summary["x"], summary["c"])
    large, small = log_preimage_bounds(key, n, l_chi)
    logger.debug(f"Counted {len(copies)} pre-images over {candidates} candidates", key=key)
    return PreimageCount(
        l=key[0], x=key[1], c=key[2], candidates=candidates, tuples=tuples, copies=len(copies),
        log_bound=large, log_small=small,
    )


def preimage_audit(counts: Sequence[PreimageCount], skipped: int = 0) -> PreimageAudit:
    """Compare exhaustive pre-image counts with the general and the small-excess bounds"""
    audit = PreimageAudit(groups=len(counts), skipped=skipped)
    for count in counts:
        key = (count.l, count.x, count.c)
        log_count = math.log(count.copies) if count.copies else -math.inf
        audit.max_count = max(audit.max_count, count.copies)
        if log_count > count.log_bound:
            audit.large_violations += 1
        if log_count > count.log_small:
            audit.small_exceedances += 1
            logger.info(f"Pre-image count {count.copies} exceeds the small-excess bound shape", key=key)
        audit.rows.append({
            "l": count.l, "x": count.x, "c": count.c, "count": count.copies,
            "log_bound": count.log_bound, "log_small": count.log_small,
        })
    return audit
