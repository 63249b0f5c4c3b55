"""
Graph, family and labeled-copy models
"""

from enum import Enum
from math import isqrt
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from ..core.config import FAMILY_ALIASES
from ..core.exceptions import ParameterError

Edge = Tuple[int, int]


def pair_index(u: int, v: int, n: int) -> int:
    """Row-major index of the unordered pair {u, v} among the N = n(n-1)/2 pairs"""
    if u > v:
        u, v = v, u
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def pair_count(n: int) -> int:
    """N = n choose 2"""
    return n * (n - 1) // 2


def _first_error(exc: ValidationError) -> str:
    errors = exc.errors()
    if not errors:
        return str(exc)
    msg = errors[0].get("msg", str(exc))
    return msg.replace("Value error, ", "")


class FamilyKind(str, Enum):
    """Concrete d-regular families"""
    POWER_OF_CYCLE = "power_of_cycle"
    TOROIDAL_GRID = "toroidal_grid"
    SQUARE_LATTICE = "square_lattice_completed"
    TRIANGULAR_LATTICE = "triangular_lattice_completed"
    OVERLAPPING_FOUR_CYCLES = "overlapping_four_cycles"
    RANDOM_REGULAR = "random_regular"


class FamilySpec(BaseModel):
    """Which d-regular family F(n) to instantiate"""
    model_config = ConfigDict(frozen=True)

    kind: FamilyKind
    k: Optional[int] = Field(default=None, ge=1)
    m_rows: Optional[int] = Field(default=None, ge=1)
    d: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _required_parameters(self):
        if self.kind == FamilyKind.POWER_OF_CYCLE and self.k is None:
            raise ValueError("power_of_cycle requires k")
        if self.kind == FamilyKind.TOROIDAL_GRID and self.m_rows is None:
            raise ValueError("toroidal_grid requires m_rows")
        if self.kind == FamilyKind.RANDOM_REGULAR and self.d is None:
            raise ValueError("random_regular requires d")
        return self

    @classmethod
    def power_of_cycle(cls, k: int) -> "FamilySpec":
        return cls(kind=FamilyKind.POWER_OF_CYCLE, k=k)

    @classmethod
    def square_of_cycle(cls) -> "FamilySpec":
        return cls(kind=FamilyKind.POWER_OF_CYCLE, k=2)

    @property
    def degree(self) -> int:
        """Implied regularity degree"""
        if self.kind == FamilyKind.POWER_OF_CYCLE:
            return 2 * self.k
        if self.kind in (FamilyKind.TOROIDAL_GRID, FamilyKind.SQUARE_LATTICE):
            return 4
        if self.kind == FamilyKind.TRIANGULAR_LATTICE:
            return 6
        if self.kind == FamilyKind.OVERLAPPING_FOUR_CYCLES:
            return 3
        return int(self.d)

    @property
    def label(self) -> str:
        """Canonical text form, inverse of parse"""
        if self.kind == FamilyKind.POWER_OF_CYCLE:
            return f"power_of_cycle:{self.k}"
        if self.kind == FamilyKind.TOROIDAL_GRID:
            return f"toroidal_grid:{self.m_rows}"
        if self.kind == FamilyKind.RANDOM_REGULAR:
            return f"random_regular:{self.d}:{self.seed or 0}"
        return self.kind.value.replace("_completed", "")

    @property
    def is_square_of_cycle(self) -> bool:
        return self.kind == FamilyKind.POWER_OF_CYCLE and self.k == 2

    def check(self, n: int) -> None:
        """Raise ParameterError naming the violated admissibility constraint"""
        if n < 1:
            raise ParameterError(f"n must be positive, got {n}")
        if self.kind == FamilyKind.POWER_OF_CYCLE:
            if n < 2 * self.k + 1:
                raise ParameterError(f"power_of_cycle({self.k}) needs n >= 2k+1 = {2 * self.k + 1}, got n={n}")
        elif self.kind == FamilyKind.TOROIDAL_GRID:
            m = self.m_rows
            if m < 3:
                raise ParameterError(f"toroidal_grid needs m_rows >= 3, got {m}")
            if n % m != 0:
                raise ParameterError(f"toroidal_grid needs m_rows | n, got m_rows={m}, n={n}")
            if n // m < 3:
                raise ParameterError(f"toroidal_grid needs n/m_rows >= 3, got {n // m}")
        elif self.kind == FamilyKind.SQUARE_LATTICE:
            b = isqrt(n)
            if b < 3 or n < 2 * b + 1:
                raise ParameterError(f"square_lattice needs floor(sqrt(n)) >= 3 and n >= 2b+1, got n={n}")
        elif self.kind == FamilyKind.TRIANGULAR_LATTICE:
            b = isqrt(n)
            if b < 3 or n < 2 * b + 3:
                raise ParameterError(f"triangular_lattice needs floor(sqrt(n)) >= 3 and n >= 2b+3, got n={n}")
        elif self.kind == FamilyKind.OVERLAPPING_FOUR_CYCLES:
            if n % 2 != 0:
                raise ParameterError(f"overlapping_four_cycles needs n even, got n={n}")
            if n < 6:
                raise ParameterError(f"overlapping_four_cycles needs n >= 6, got n={n}")
        elif self.kind == FamilyKind.RANDOM_REGULAR:
            if (self.d * n) % 2 != 0:
                raise ParameterError(f"random_regular needs d*n even, got d={self.d}, n={n}")
            if self.d >= n:
                raise ParameterError(f"random_regular needs d < n, got d={self.d}, n={n}")

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """Parse 'power_of_cycle:2', 'toroidal_grid:3', 'random_regular:4:7', aliases like 'sq_cycle'"""
        raw = FAMILY_ALIASES.get(text.strip(), text.strip())
        parts = raw.split(":")
        head, args = parts[0], parts[1:]
        try:
            if head == "power_of_cycle" and len(args) == 1:
                return cls(kind=FamilyKind.POWER_OF_CYCLE, k=int(args[0]))
            if head == "toroidal_grid" and len(args) == 1:
                return cls(kind=FamilyKind.TOROIDAL_GRID, m_rows=int(args[0]))
            if head in ("square_lattice", "square_lattice_completed") and not args:
                return cls(kind=FamilyKind.SQUARE_LATTICE)
            if head in ("triangular_lattice", "triangular_lattice_completed") and not args:
                return cls(kind=FamilyKind.TRIANGULAR_LATTICE)
            if head == "overlapping_four_cycles" and not args:
                return cls(kind=FamilyKind.OVERLAPPING_FOUR_CYCLES)
            if head == "random_regular" and len(args) in (1, 2):
                seed = int(args[1]) if len(args) == 2 else 0
                return cls(kind=FamilyKind.RANDOM_REGULAR, d=int(args[0]), seed=seed)
        except ValidationError as e:
            raise ParameterError(f"Invalid family '{text}': {_first_error(e)}") from e
        except ValueError as e:
            raise ParameterError(f"Invalid family '{text}': {e}") from e
        raise ParameterError(f"Unknown family '{text}'")


class Graph(BaseModel):
    """Simple undirected graph on vertex set 0..n-1 with an optional regularity tag"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0)
    edges: Tuple[Tuple[int, int], ...] = ()
    d: Optional[int] = Field(default=None, ge=0)

    _adjacency: Optional[List[FrozenSet[int]]] = PrivateAttr(default=None)
    _masks: Optional[List[int]] = PrivateAttr(default=None)
    _edge_set: Optional[FrozenSet[Edge]] = PrivateAttr(default=None)

    @field_validator("edges", mode="before")
    @classmethod
    def _normalize_edges(cls, value):
        normalized = []
        for pair in value:
            u, v = (int(t) for t in pair)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            normalized.append((u, v) if u < v else (v, u))
        normalized.sort()
        for a, b in zip(normalized, normalized[1:]):
            if a == b:
                raise ValueError(f"multi-edge {a}")
        return tuple(normalized)

    @model_validator(mode="after")
    def _check_range_and_regularity(self):
        for u, v in self.edges:
            if u < 0 or v >= self.n:
                raise ValueError(f"edge ({u}, {v}) outside vertex range 0..{self.n - 1}")
        if self.d is not None:
            degrees = self.degrees()
            for v, deg in enumerate(degrees):
                if deg != self.d:
                    raise ValueError(f"vertex {v} has degree {deg}, expected {self.d}")
        return self

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], d: Optional[int] = None) -> "Graph":
        """Validated construction; invalid input raises ParameterError"""
        try:
            return cls(n=n, edges=tuple(tuple(e) for e in edges), d=d)
        except ValidationError as e:
            raise ParameterError(_first_error(e)) from e

    @classmethod
    def trusted(cls, n: int, edges: Iterable[Edge], d: Optional[int] = None) -> "Graph":
        """Construction for edges already known to be simple, in range and normalized u < v"""
        return cls.model_construct(n=n, edges=tuple(sorted(edges)), d=d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges and self.d == other.d

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.d))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_set(self) -> FrozenSet[Edge]:
        if self._edge_set is None:
            self._edge_set = frozenset(self.edges)
        return self._edge_set

    @property
    def adjacency(self) -> List[FrozenSet[int]]:
        if self._adjacency is None:
            adj: List[set] = [set() for _ in range(self.n)]
            for u, v in self.edges:
                adj[u].add(v)
                adj[v].add(u)
            self._adjacency = [frozenset(a) for a in adj]
        return self._adjacency

    @property
    def masks(self) -> List[int]:
        """Neighbourhood bitmasks"""
        if self._masks is None:
            masks = [0] * self.n
            for u, v in self.edges:
                masks[u] |= 1 << v
                masks[v] |= 1 << u
            self._masks = masks
        return self._masks

    def degrees(self) -> List[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edge_set

    def is_regular(self, d: Optional[int] = None) -> bool:
        degrees = self.degrees()
        target = degrees[0] if d is None and degrees else d
        return all(deg == target for deg in degrees)

    def non_isolated(self) -> List[int]:
        return sorted({v for e in self.edges for v in e})

    def edges_within(self, vertices: Iterable[int]) -> List[Edge]:
        """Edges of the induced subgraph on the given vertices"""
        vs = set(vertices)
        return [(u, v) for (u, v) in self.edges if u in vs and v in vs]

    def union(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise ParameterError(f"vertex counts differ: {self.n} vs {other.n}")
        return Graph.trusted(self.n, self.edge_set | other.edge_set)

    def intersection(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise ParameterError(f"vertex counts differ: {self.n} vs {other.n}")
        return Graph.trusted(self.n, self.edge_set & other.edge_set)

    def difference(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise ParameterError(f"vertex counts differ: {self.n} vs {other.n}")
        return Graph.trusted(self.n, self.edge_set - other.edge_set)

    def issubgraph(self, other: "Graph") -> bool:
        return self.n == other.n and self.edge_set <= other.edge_set

    def with_tag(self, d: Optional[int]) -> "Graph":
        """Same edges with a regularity tag, validated"""
        return Graph.from_edges(self.n, self.edges, d=d)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def components(self) -> List[List[int]]:
        """Connected components of the non-isolated part, each sorted, ordered by minimum vertex"""
        import networkx as nx

        g = nx.Graph()
        g.add_edges_from(self.edges)
        return sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0])

    def summary(self) -> Dict[str, int]:
        """(l, x, c) of the graph"""
        return {"l": self.num_edges, "x": len(self.non_isolated()), "c": len(self.components())}


class LabeledCopy(BaseModel):
    """A member of F_n: the canonical family instance relabeled by a permutation, with root and orientation"""
    model_config = ConfigDict(frozen=True)

    base: FamilySpec
    order: Tuple[int, ...]
    root: int = 0
    orientation: int = 1

    @field_validator("orientation")
    @classmethod
    def _orientation_sign(cls, v):
        if v not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        return v

    @model_validator(mode="after")
    def _check_root(self):
        if self.order and self.root != self.order[0]:
            raise ValueError("root must be the image of canonical vertex 0")
        return self

    @property
    def n(self) -> int:
        return len(self.order)

    def position(self) -> Dict[int, int]:
        """Inverse permutation: vertex -> canonical position"""
        return {v: i for i, v in enumerate(self.order)}
