"""
Fragment models: embeddings, fragments, diamond layouts, piece cuts, matching rules,
reconstruction tuples and schedule traces
"""

from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from .graph import Edge, FamilySpec

Diamond = Tuple[int, int, int, int]


class SearchStatus(str, Enum):
    """Outcome of a containment search"""
    FOUND = "found"
    NONE = "none"
    INCONCLUSIVE = "inconclusive"


class Embedding(BaseModel):
    """Placement of the canonical family instance: canonical vertex i goes to perm[i]"""
    model_config = ConfigDict(frozen=True)

    family: FamilySpec
    perm: Tuple[int, ...]

    @model_validator(mode="after")
    def _bijection(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError("perm must be a bijection on [n]")
        return self

    @property
    def n(self) -> int:
        return len(self.perm)


class SearchResult(BaseModel):
    """Result of find_spanning_copy"""
    status: SearchStatus
    embedding: Optional[Embedding] = None
    nodes_visited: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "result": self.status.value,
            "embedding": list(self.embedding.perm) if self.embedding else None,
            "nodes_visited": self.nodes_visited,
        }


class Fragment(BaseModel):
    """Intersection of the planted copy with a copy found inside planted + sprinkled edges"""
    planted: Embedding
    found: Embedding
    edges: List[Edge] = Field(default_factory=list)
    trivial: bool = False
    inconclusive: bool = False
    mode: str = "heuristic"
    rounds: int = 0
    candidates: int = 0
    grounded: List[Diamond] = Field(default_factory=list)
    separated: Optional[bool] = None

    @property
    def size(self) -> int:
        return len(self.edges)


class DiamondLayout(BaseModel):
    """Disjoint diamonds planted at near-equal distances along a rooted square-of-cycle order"""
    n: int
    chi: int
    diamonds: List[Diamond]
    gaps: List[int]
    starts: List[int]

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.diamonds) != self.chi or len(self.gaps) != self.chi:
            raise ValueError("layout needs chi diamonds and chi gaps")
        if sum(g + 4 for g in self.gaps) != self.n:
            raise ValueError("gaps and diamonds must cover n vertices")
        if self.gaps and max(self.gaps) - min(self.gaps) > 1:
            raise ValueError("gaps must differ by at most one")
        seen = [v for diamond in self.diamonds for v in diamond]
        if len(set(seen)) != len(seen):
            raise ValueError("diamonds must be vertex-disjoint")
        return self

    @property
    def root(self) -> int:
        return self.diamonds[0][0]

    def vertices(self) -> List[int]:
        return [v for diamond in self.diamonds for v in diamond]

    def edges(self) -> List[Edge]:
        """Five edges per diamond: K4 without its first-last pair"""
        out: List[Edge] = []
        for u1, u2, u3, u4 in self.diamonds:
            for a, b in ((u1, u2), (u1, u3), (u2, u3), (u2, u4), (u3, u4)):
                out.append((a, b) if a < b else (b, a))
        return out


class CutRun(BaseModel):
    """One diamond-free stretch of a long closed run and how it was cut"""
    stretch: List[int]
    pieces: List[List[int]]
    retained_head: List[int]
    retained_tail: List[int]

    @property
    def glue(self) -> int:
        """Last retained vertex before the removed stretch"""
        return self.retained_head[-1]


class PieceCut(BaseModel):
    """Pieces cut from the interiors of long closed runs of a fragment"""
    source: List[Edge]
    core: List[Edge]
    order: List[int]
    mu: int
    threshold: int
    runs: List[CutRun] = Field(default_factory=list)

    @property
    def pieces(self) -> List[List[int]]:
        return [piece for run in self.runs for piece in run.pieces]

    @property
    def removed(self) -> int:
        return sum(len(piece) for piece in self.pieces)


class MatchingRule(BaseModel):
    """Fixed random bipartite graph between diamond indices and positions"""
    chi: int
    n: int
    beta: float
    seed: int
    adjacency: List[List[int]]

    _sets: Optional[List[FrozenSet[int]]] = PrivateAttr(default=None)

    def allows(self, diamond: int, position: int) -> bool:
        if self._sets is None:
            self._sets = [frozenset(row) for row in self.adjacency]
        return position in self._sets[diamond]

    def degrees(self) -> List[int]:
        return [len(row) for row in self.adjacency]


class Relocation(BaseModel):
    """One piece moved into a diamond"""
    piece: List[int]
    diamond: int
    glue: int
    run_index: int
    piece_index: int
    source_position: int


class SmoothingResult(BaseModel):
    """Smoothed fragment, relocation plan and witness copy"""
    smoothed: List[Edge]
    relocations: List[Relocation] = Field(default_factory=list)
    order: List[int]
    witness: Optional[Embedding] = None
    eligible: List[int] = Field(default_factory=list)
    conserved: bool = True
    violations: List[str] = Field(default_factory=list)


class ReconstructionTuple(BaseModel):
    """
    Data recovering the planted copy from the smoothed fragment

    alpha holds, per component of S with an edge, its leftmost vertex along the
    rooted smoothed order and one step code per BFS tree edge; pi lists every
    component of S, isolated vertices included, by the position of that vertex.
    """
    model_config = ConfigDict(frozen=True)

    A: Tuple[int, ...] = ()
    A_prime: Tuple[int, ...] = ()
    alpha: Tuple[Tuple[int, Tuple[int, ...]], ...] = ()
    tau1: Tuple[int, ...] = ()
    tau2: Tuple[int, ...] = ()
    rho: Tuple[int, ...] = ()
    f: Tuple[int, ...] = ()
    pi: Tuple[int, ...] = ()


class RoundRecord(BaseModel):
    """One schedule round over the population"""
    name: str
    m: Optional[int] = None
    p: Optional[float] = None
    target: Optional[int] = None
    sizes: List[Optional[int]] = Field(default_factory=list)
    inconclusive: int = 0
    trivial: int = 0
    closed_histogram: Dict[int, int] = Field(default_factory=dict)
    smoothing_events: int = 0
    smoothing_refused: int = 0
    rejections: int = 0
    covered: Optional[int] = None
    within_target: Optional[int] = None
    checks: Dict[str, bool] = Field(default_factory=dict)

    @property
    def median_size(self) -> Optional[float]:
        values = sorted(s for s in self.sizes if s is not None)
        if not values:
            return None
        mid = len(values) // 2
        return float(values[mid]) if len(values) % 2 else (values[mid - 1] + values[mid]) / 2.0


class FragmentTrace(BaseModel):
    """Replayable record of a schedule run"""
    preset: str
    family: str
    n: int
    population: int
    params: Dict[str, Any] = Field(default_factory=dict)
    seeds: Dict[str, Any] = Field(default_factory=dict)
    rounds: List[RoundRecord] = Field(default_factory=list)
    covered_fraction: Optional[float] = None
    audit: Dict[str, Any] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)


class LhsResult(BaseModel):
    """Weighted tail of the intersection distribution against the delta^3 target"""
    value: float
    delta: float
    target: float
    passed: bool
    mode: str
    flagged: bool = False
    terms: Dict[int, float] = Field(default_factory=dict)


class BadnessEstimate(BaseModel):
    """Fraction of sprinkled edge sets for which too many copies keep a large intersection"""
    n: int
    m: int
    l_cut: int
    delta: float
    trials: int
    bad: int
    fraction: float
    ci_low: float
    ci_high: float
    mode: str
    flagged: bool = False
