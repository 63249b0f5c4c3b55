"""
Spanning-copy search

Exact containment by backtracking over pattern vertices, anchored local search over
cyclic orders for powers of cycles, and the resampling fragment sampler.
"""

from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
import structlog
from pydantic import BaseModel

from ..core.config import settings
from ..core.exceptions import BudgetExceededError, ConsistencyError, ParameterError
from ..core.seeding import SeedStream
from ..fragmentation.pieces import closed_runs
from ..generators.families import build_family, relabel
from ..models.fragment import Diamond, Embedding, Fragment, SearchResult, SearchStatus
from ..models.graph import Edge, FamilyKind, FamilySpec, Graph

logger = structlog.get_logger(__name__)

_TRANSITIVE_KINDS = {
    FamilyKind.POWER_OF_CYCLE,
    FamilyKind.TOROIDAL_GRID,
    FamilyKind.SQUARE_LATTICE,
    FamilyKind.TRIANGULAR_LATTICE,
    FamilyKind.OVERLAPPING_FOUR_CYCLES,
}

EXACT_SEARCH_LIMIT = 12


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def embedding_graph(embedding: Embedding) -> Graph:
    """Graph of relabel(canonical instance, perm)"""
    return relabel(build_family(embedding.family, embedding.n), embedding.perm)


def _pattern_order(P: Graph) -> List[int]:
    """Greedy order: next vertex has the most placed neighbours, ties by label"""
    placed = [False] * P.n
    weight = [0] * P.n
    order: List[int] = []
    for _ in range(P.n):
        best = -1
        for v in range(P.n):
            if not placed[v] and (best < 0 or weight[v] > weight[best]):
                best = v
        order.append(best)
        placed[best] = True
        for w in P.adjacency[best]:
            weight[w] += 1
    return order


class _Backtracker:
    """Depth-first search for injective maps of a pattern into a host, with a node budget"""

    def __init__(self, pattern: Graph, host: Graph, budget: int, stream: SeedStream, anchor_first: bool):
        self.P = pattern
        self.G = host
        self.budget = budget
        self.visited = 0
        self.anchor_first = anchor_first
        self.order = _pattern_order(pattern)
        index = {p: t for t, p in enumerate(self.order)}
        self.back = [[q for q in pattern.adjacency[p] if index[q] < index[p]] for p in self.order]
        degrees = pattern.degrees()
        self.pattern_degree = degrees
        self.need = min(degrees) if degrees else 0
        self.tiebreak = stream.rng.random(host.n)

    def _candidates(self, t: int, image, used, avail) -> List[int]:
        hadj = self.G.adjacency
        back = self.back[t]
        if t == 0 and self.anchor_first:
            pool: Iterable[int] = [0]
        elif not back:
            pool = range(self.G.n)
        else:
            common = set(hadj[image[back[0]]])
            for q in back[1:]:
                common &= hadj[image[q]]
            pool = common
        cands = [h for h in pool if not used[h] and avail[h] >= self.need]
        cands.sort(key=lambda h: (avail[h], self.tiebreak[h]))
        return cands

    def run(self) -> Iterator[List[int]]:
        """Yield complete maps pattern vertex -> host vertex"""
        n = self.P.n
        if n == 0:
            yield []
            return
        hadj = self.G.adjacency
        image = [-1] * n
        used = [False] * self.G.n
        avail = self.G.degrees()
        remaining = list(self.pattern_degree)

        def assign(t: int, h: int):
            p = self.order[t]
            image[p] = h
            used[h] = True
            closed = []
            for q in self.back[t]:
                remaining[q] -= 1
                if remaining[q] == 0:
                    closed.append(image[q])
            remaining[p] = self.pattern_degree[p] - len(self.back[t])
            if remaining[p] == 0:
                closed.append(h)
            touched = []
            ok = sum(1 for w in hadj[h] if not used[w]) >= remaining[p]
            for c in closed:
                for w in hadj[c]:
                    if not used[w]:
                        avail[w] -= 1
                        touched.append(w)
                        if avail[w] < self.need:
                            ok = False
            return (p, h, touched), ok

        def unassign(t: int, log) -> None:
            p, h, touched = log
            for w in touched:
                avail[w] += 1
            for q in self.back[t]:
                remaining[q] += 1
            remaining[p] = self.pattern_degree[p]
            image[p] = -1
            used[h] = False

        t = 0
        cands = [self._candidates(0, image, used, avail)]
        ptr = [0]
        logs = [None]
        while t >= 0:
            if logs[t] is not None:
                unassign(t, logs[t])
                logs[t] = None
            if ptr[t] >= len(cands[t]):
                cands.pop()
                ptr.pop()
                logs.pop()
                t -= 1
                continue
            h = cands[t][ptr[t]]
            ptr[t] += 1
            self.visited += 1
            if self.visited > self.budget:
                raise BudgetExceededError(f"search budget {self.budget} exhausted", reached=t, visited=self.visited)
            logs[t], ok = assign(t, h)
            if not ok:
                continue
            if t == n - 1:
                yield list(image)
                continue
            t += 1
            cands.append(self._candidates(t, image, used, avail))
            ptr.append(0)
            logs.append(None)


def find_spanning_copy(host: Graph, spec: FamilySpec, budget: Optional[int] = None, seed: int = 0) -> SearchResult:
    """Spanning copy of the family inside the host: found, none (exhausted) or inconclusive (budget)"""
    n = host.n
    spec.check(n)
    pattern = build_family(spec, n)
    if host.num_edges < pattern.num_edges or min(host.degrees()) < min(pattern.degrees()):
        return SearchResult(status=SearchStatus.NONE, nodes_visited=0)
    search = _Backtracker(
        pattern, host, budget or settings.search_budget, SeedStream(seed), spec.kind in _TRANSITIVE_KINDS,
    )
    try:
        for image in search.run():
            embedding = Embedding(family=spec, perm=tuple(image))
            return SearchResult(status=SearchStatus.FOUND, embedding=embedding, nodes_visited=search.visited)
    except BudgetExceededError:
        logger.debug(f"Containment search inconclusive after {search.visited} nodes", n=n)
        return SearchResult(status=SearchStatus.INCONCLUSIVE, nodes_visited=search.visited)
    return SearchResult(status=SearchStatus.NONE, nodes_visited=search.visited)


def enumerate_copies(host: Graph, spec: FamilySpec, budget: Optional[int] = None) -> List[Tuple[int, ...]]:
    """One perm per distinct member of F_n contained in the host"""
    pattern = build_family(spec, host.n)
    search = _Backtracker(
        pattern, host, budget or settings.enumeration_budget, SeedStream(0), spec.kind in _TRANSITIVE_KINDS,
    )
    seen: Set[FrozenSet[Edge]] = set()
    copies: List[Tuple[int, ...]] = []
    for image in search.run():
        key = frozenset(_edge(image[u], image[v]) for u, v in pattern.edges)
        if key not in seen:
            seen.add(key)
            copies.append(tuple(image))
    return copies


def _copy_edges(order: Sequence[int], k: int) -> Set[Edge]:
    n = len(order)
    return {_edge(order[i], order[(i + s) % n]) for i in range(n) for s in range(1, k + 1)}


def _window_pairs(seq: Sequence[int], k: int) -> Set[Edge]:
    return {_edge(seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, min(i + k + 1, len(seq)))}


class CyclicOrderSearch:
    """Local search over cyclic orders whose k-th power stays inside a host edge set"""

    def __init__(
        self,
        order: Sequence[int],
        k: int,
        host: FrozenSet[Edge],
        target: FrozenSet[Edge],
        grounded: Iterable[Diamond] = (),
        max_segment: Optional[int] = None,
    ):
        self.order = list(order)
        self.n = len(self.order)
        self.k = k
        self.host = host
        self.target = target
        self.max_segment = max_segment or k + 1
        self.block = [-1] * self.n
        self.pinned = [False] * self.n
        for b, diamond in enumerate(grounded):
            for v in diamond:
                self.block[v] = b
                self.pinned[v] = True
        self.root = self.order[0]
        if any(self.pinned):
            self.pinned[self.root] = True
        self.evaluations = 0
        self.accepted = 0
        self._reindex()
        self.overlap = len(_copy_edges(self.order, k) & target)

    def _reindex(self) -> None:
        n = self.n
        self.pos = [0] * n
        for i, v in enumerate(self.order):
            self.pos[v] = i
        flags = np.array([self.pinned[v] for v in self.order] * 2, dtype=np.int64)
        self._grounded_prefix = np.concatenate([[0], np.cumsum(flags)])

    def _at(self, i: int) -> int:
        return self.order[i % self.n]

    def _span(self, start: int, length: int) -> List[int]:
        return [self.order[(start + a) % self.n] for a in range(length)]

    def _grounded_in(self, start: int, length: int) -> int:
        """Pinned vertices in the cyclic window of the given length starting at position start"""
        s = start % self.n
        return int(self._grounded_prefix[s + length] - self._grounded_prefix[s])

    def _cut_ok(self, i: int) -> bool:
        """The boundary between positions i-1 and i does not split a grounded diamond"""
        a, b = self.block[self._at(i - 1)], self.block[self._at(i)]
        return a < 0 or a != b

    def _shifts_pinned(self, start: int, length: int, after: int) -> bool:
        """Whether moving the segment would change the rooted position of a pinned vertex"""
        r = self.pos[self.root]
        s = (start - r) % self.n
        a = (after - r) % self.n
        if a > s:
            return self._grounded_in(start + length, a - s - length + 1) > 0
        return self._grounded_in(after + 1, s - a - 1) > 0

    def _score(self, removed: Set[Edge], added: Set[Edge]) -> Optional[int]:
        for e in added:
            if e not in self.host:
                return None
        return len(added & self.target) - len(removed & self.target)

    def reversal(self, start: int, length: int) -> Optional[Tuple[int, Tuple]]:
        """Delta of reversing the segment of the given length starting at position start"""
        k, n = self.k, self.n
        if length < 2 * k or n - length < 2 * k:
            return None
        end = start + length - 1
        if not (self._cut_ok(start) and self._cut_ok(end + 1)) or self._grounded_in(start, length):
            return None
        old = _window_pairs(self._span(start - k, 2 * k), k) | _window_pairs(self._span(end - k + 1, 2 * k), k)
        head = self._span(start, k)
        tail = self._span(end - k + 1, k)
        new_left = self._span(start - k, k) + tail[::-1]
        new_right = head[::-1] + self._span(end + 1, k)
        new = _window_pairs(new_left, k) | _window_pairs(new_right, k)
        delta = self._score(old - new, new - old)
        return None if delta is None else (delta, ("reverse", start, length))

    def relocation(self, start: int, length: int, after: int, reverse: bool) -> Optional[Tuple[int, Tuple]]:
        """Delta of moving a short segment to sit right after position `after`"""
        k, n = self.k, self.n
        end = start + length - 1
        forward = (after - end) % n
        backward = (start - after - 1) % n
        if length < 1 or length > self.max_segment or forward < 2 * k or backward < 2 * k:
            return None
        if not (self._cut_ok(start) and self._cut_ok(end + 1) and self._cut_ok(after + 1)):
            return None
        if self._grounded_in(start, length) or self._shifts_pinned(start, length, after):
            return None
        segment = self._span(start, length)
        moved = segment[::-1] if reverse else segment
        old = _window_pairs(self._span(start - k, length + 2 * k), k) | _window_pairs(self._span(after - k + 1, 2 * k), k)
        new = (
            _window_pairs(self._span(start - k, k) + self._span(end + 1, k), k)
            | _window_pairs(self._span(after - k + 1, k) + moved + self._span(after + 1, k), k)
        )
        delta = self._score(old - new, new - old)
        return None if delta is None else (delta, ("move", start, length, after, reverse))

    def apply(self, move: Tuple, delta: int) -> None:
        n = self.n
        if move[0] == "reverse":
            _, start, length = move
            idx = [(start + a) % n for a in range(length)]
            values = [self.order[i] for i in idx][::-1]
            for i, v in zip(idx, values):
                self.order[i] = v
        else:
            _, start, length, after, reverse = move
            segment = self._span(start, length)
            anchor = self._at(after)
            drop = set(segment)
            rest = [v for v in self.order if v not in drop]
            at = rest.index(anchor) + 1
            self.order = rest[:at] + (segment[::-1] if reverse else segment) + rest[at:]
        self.overlap += delta
        self.accepted += 1
        self._reindex()

    def moves_for(self, a: int, b: int) -> Iterator[Tuple]:
        """Candidate moves that bring a and b within distance 1, in a fixed order"""
        n = self.n
        pa, pb = self.pos[a], self.pos[b]
        yield ("reverse", (pa + 1) % n, (pb - pa) % n)
        yield ("reverse", (pb + 1) % n, (pa - pb) % n)
        for x, px, y, py in ((a, pa, b, pb), (b, pb, a, pa)):
            for length in range(1, self.max_segment + 1):
                yield ("move", py, length, px, False)
                yield ("move", (py - length + 1) % n, length, px, True)

    def evaluate(self, move: Tuple) -> Optional[Tuple[int, Tuple]]:
        self.evaluations += 1
        if move[0] == "reverse":
            return self.reversal(move[1], move[2])
        return self.relocation(*move[1:])

    def near(self, a: int, b: int) -> bool:
        gap = (self.pos[a] - self.pos[b]) % self.n
        return min(gap, self.n - gap) <= self.k

    def minimize(self, pairs: Sequence[Edge], budget: int) -> None:
        """First-improvement sweeps in lexicographic move order until no move improves"""
        improved = True
        while improved and self.evaluations < budget:
            improved = False
            for a, b in pairs:
                if self.evaluations >= budget:
                    break
                if self.near(a, b):
                    continue
                for move in self.moves_for(a, b):
                    scored = self.evaluate(move)
                    if scored is not None and scored[0] < 0:
                        self.apply(scored[1], scored[0])
                        improved = True
                        break

    def wander(self, pairs: Sequence[Edge], stream: SeedStream, sweeps: int, budget: int) -> None:
        """Seeded walk accepting improving moves and, with probability 1/2, neutral ones"""
        pairs = list(pairs)
        for _ in range(sweeps):
            stream.shuffle(pairs)
            changed = False
            for a, b in pairs:
                if self.evaluations >= budget:
                    return
                if self.near(a, b):
                    continue
                for move in self.moves_for(a, b):
                    scored = self.evaluate(move)
                    if scored is None:
                        continue
                    if scored[0] < 0 or (scored[0] == 0 and stream.random() < 0.5):
                        self.apply(scored[1], scored[0])
                        changed = True
                        break
            if not changed:
                return

    def rooted(self, root: int) -> List[int]:
        i = self.pos[root]
        return self.order[i:] + self.order[:i]


def _require_power_of_cycle(spec: FamilySpec) -> int:
    if spec.kind != FamilyKind.POWER_OF_CYCLE:
        raise ParameterError(f"anchored local search runs on powers of cycles, got {spec.label}")
    return spec.k


def _keeps_grounded(perm: Sequence[int], planted: Sequence[int], grounded: Sequence[Diamond]) -> bool:
    """Every grounded vertex sits at its planted position"""
    where = {v: i for i, v in enumerate(planted)}
    return all(perm[where[v]] == v for diamond in grounded for v in diamond)


def _align_grounded(perm: Sequence[int], planted: Sequence[int], grounded: Sequence[Diamond]) -> Optional[Tuple[int, ...]]:
    """The rotation or reflection of a cyclic order that keeps the grounded diamonds in place, if any"""
    n = len(perm)
    for image in (list(perm), list(perm)[::-1]):
        for shift in range(n):
            candidate = tuple(image[shift:] + image[:shift])
            if _keeps_grounded(candidate, planted, grounded):
                return candidate
    return None


def anchored_copy_search(
    F: Embedding,
    W: Graph,
    objective: str = "minimize_intersection",
    budget: Optional[int] = None,
    seed: int = 0,
    target: Optional[Graph] = None,
    grounded: Sequence[Diamond] = (),
    exact: Optional[bool] = None,
    sweeps: int = 3,
) -> Fragment:
    """A copy F' inside F + W pursuing a small intersection with the target (default F)"""
    if objective not in ("minimize_intersection", "sample"):
        raise ParameterError(f"Unknown objective '{objective}'")
    n = F.n
    F_graph = embedding_graph(F)
    host = F_graph.union(W)
    target_edges = (target or F_graph).edge_set
    budget = budget or settings.search_budget
    stream = SeedStream(seed)
    use_exact = exact if exact is not None else False
    if use_exact:
        if n > EXACT_SEARCH_LIMIT:
            raise ParameterError(f"exact anchored search needs n <= {EXACT_SEARCH_LIMIT}, got n={n}")
        try:
            copies = enumerate_copies(host, F.family, budget)
        except BudgetExceededError:
            return Fragment(planted=F, found=F, edges=sorted(F_graph.edge_set & target_edges), trivial=True, inconclusive=True, mode="exact")
        pattern = build_family(F.family, n)
        scored = []
        for perm in copies:
            if grounded:
                perm = _align_grounded(perm, F.perm, grounded)
                if perm is None:
                    continue
            edges = {_edge(perm[u], perm[v]) for u, v in pattern.edges}
            scored.append((len(edges & target_edges), tuple(sorted(edges & target_edges)), perm))
        if objective == "minimize_intersection":
            _, edges, perm = min(scored)
        else:
            _, edges, perm = scored[stream.integers(0, len(scored))]
        found = Embedding(family=F.family, perm=perm)
        trivial = relabel(pattern, perm).edge_set == F_graph.edge_set
        return Fragment(planted=F, found=found, edges=list(edges), trivial=trivial, mode="exact", candidates=len(scored))

    k = _require_power_of_cycle(F.family)
    search = CyclicOrderSearch(F.perm, k, host.edge_set, target_edges, grounded)
    pairs = sorted(W.edge_set - F_graph.edge_set)
    if objective == "minimize_intersection":
        search.minimize(pairs, budget)
    else:
        search.wander(pairs, stream, sweeps, budget)
    order = search.rooted(F.perm[0])
    found = Embedding(family=F.family, perm=tuple(order))
    edges = sorted(_copy_edges(order, k) & target_edges)
    if len(edges) != search.overlap:
        raise ConsistencyError(f"tracked overlap {search.overlap} differs from recomputed {len(edges)}")
    if not _keeps_grounded(order, F.perm, grounded):
        raise ConsistencyError("a grounded diamond left its planted position")
    logger.debug(f"Anchored search accepted {search.accepted} moves", n=n, overlap=len(edges))
    return Fragment(
        planted=F, found=found, edges=edges, trivial=search.accepted == 0,
        inconclusive=search.evaluations >= budget and search.accepted == 0, mode="heuristic",
    )


class FragmentParams(BaseModel):
    """Resampling loop parameters"""
    l0: int
    chi: int
    round_cap: int = 5
    length_threshold: int
    attempts: int = 8
    enforce_cap: bool = True

    @property
    def cap(self) -> int:
        return self.l0 + 5 * self.chi


def long_runs(fragment: Fragment, order: Sequence[int], k: int, threshold: int) -> List[List[int]]:
    """Vertex lists of the inclusion-maximal closed runs with at least `threshold` vertices"""
    edges = set(fragment.edges)
    return [
        [order[(start + a) % len(order)] for a in range(length)]
        for start, length in closed_runs(order, edges, k)
        if length >= threshold
    ]


def _separated(claimed: Sequence[Set[int]]) -> bool:
    """Long-run vertex sets of distinct candidates are pairwise disjoint"""
    return all(not claimed[a] & claimed[b] for a in range(len(claimed)) for b in range(a + 1, len(claimed)))


def sample_fragment(
    F: Embedding,
    W: Graph,
    params: FragmentParams,
    seed: int = 0,
    grounded: Sequence[Diamond] = (),
    budget: Optional[int] = None,
) -> Fragment:
    """Resample copies, grounding a diamond left of every long closed run, until the fragment has none"""
    if params.round_cap < 1:
        raise ParameterError(f"round_cap must be at least 1, got {params.round_cap}")
    k = _require_power_of_cycle(F.family)
    stream = SeedStream(seed)
    order = list(F.perm)
    n = len(order)
    grounded = list(grounded)
    used = {v for diamond in grounded for v in diamond}
    candidates: List[Fragment] = []
    claimed: List[Set[int]] = []

    for j in range(params.round_cap):
        admissible: Optional[Fragment] = None
        runs: List[List[int]] = []
        for attempt in range(params.attempts):
            draw = anchored_copy_search(
                F, W, "sample", budget=budget, seed=stream.child("draw", j, attempt).seed, grounded=grounded,
            )
            if params.enforce_cap and draw.size > params.cap:
                continue
            runs = long_runs(draw, order, k, params.length_threshold)
            admissible = draw
            break
        if admissible is None:
            if not candidates:
                return Fragment(planted=F, found=F, edges=sorted(embedding_graph(F).edge_set), trivial=True, rounds=j + 1)
            break
        admissible = admissible.model_copy(update={"rounds": j + 1, "grounded": list(grounded)})
        if not runs:
            return admissible.model_copy(update={"candidates": len(candidates) + 1, "separated": _separated(claimed)})
        candidates.append(admissible)
        claimed.append({v for run in runs for v in run})

        position = {v: i for i, v in enumerate(order)}
        for run in runs:
            p = position[run[0]]
            diamond = tuple(order[(p + a) % n] for a in (-2, -1, 0, 1))
            if used.isdisjoint(diamond):
                grounded.append(diamond)
                used.update(diamond)

    separated = _separated(claimed)
    if not separated:
        logger.info("Long closed runs of two candidate fragments overlap", candidates=len(candidates))
    pick = candidates[stream.integers(0, len(candidates))]
    return pick.model_copy(update={"candidates": len(candidates), "rounds": params.round_cap, "separated": separated})
