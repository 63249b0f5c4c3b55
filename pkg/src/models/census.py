"""
Census models: (l, x, c) keys, census tables and extension profiles
"""

from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

KeyTuple = Tuple[int, int, int]


def delta_level(d: int) -> int:
    """Minimal boundary level: d+1 for odd d, d+2 for even d"""
    return d + 1 if d % 2 else d + 2


class CensusKey(BaseModel):
    """Edges l, non-isolated vertices x, components c (isolated vertices excluded)"""
    model_config = ConfigDict(frozen=True)

    l: int = Field(..., ge=0)
    x: int = Field(..., ge=0)
    c: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _structurally_valid(self):
        if self.c > self.l:
            raise ValueError(f"c={self.c} exceeds l={self.l}")
        if self.x > self.l + self.c:
            raise ValueError(f"x={self.x} exceeds l+c={self.l + self.c}")
        if self.l > 0 and (self.c == 0 or self.x < 2):
            raise ValueError("a non-empty subgraph has at least one component and two vertices")
        return self

    @classmethod
    def of(cls, key: KeyTuple) -> "CensusKey":
        return cls(l=key[0], x=key[1], c=key[2])

    def as_tuple(self) -> KeyTuple:
        return (self.l, self.x, self.c)

    def sigma(self, d: int) -> Fraction:
        """Excess (d/2)x - l - (Delta/2)c"""
        return Fraction(d * self.x, 2) - self.l - Fraction(delta_level(d) * self.c, 2)


class CensusTable(BaseModel):
    """Exact subgraph counts of a fixed host grouped by (l, x, c)"""
    host: str
    n: int
    d: int
    num_edges: int
    counts: Dict[KeyTuple, int] = Field(default_factory=dict)
    l_max: int
    complete: bool = True
    engine: str = "powerset"
    window: Optional[int] = None

    def count(self, key: KeyTuple) -> int:
        return self.counts.get(tuple(key), 0)

    def items(self) -> Iterator[Tuple[CensusKey, int]]:
        for key in sorted(self.counts):
            yield CensusKey.of(key), self.counts[key]

    def total(self) -> int:
        return sum(self.counts.values())

    def by_l(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for (l, _, _), count in self.counts.items():
            out[l] = out.get(l, 0) + count
        return dict(sorted(out.items()))

    def missing_levels(self, lo: int, hi: int) -> List[int]:
        """Edge counts in [lo, hi] the table does not cover"""
        return [l for l in range(lo, hi + 1) if l > self.l_max]

    def merge(self, other: "CensusTable") -> "CensusTable":
        """Bucket-wise sum of two tables over disjoint parts of the edge-subset space"""
        merged = dict(self.counts)
        for key, count in other.counts.items():
            merged[key] = merged.get(key, 0) + count
        return self.model_copy(update={
            "counts": merged,
            "l_max": min(self.l_max, other.l_max),
            "complete": self.complete and other.complete,
        })

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"l": k.l, "x": k.x, "c": k.c, "sigma": float(k.sigma(self.d)), "count": count}
            for k, count in self.items()
        ]
        return pd.DataFrame(rows, columns=["l", "x", "c", "sigma", "count"])


class ExtensionProfile(BaseModel):
    """Per-bucket total and maximum number of copies extending a subgraph of the host"""
    family: str
    n: int
    copies: int
    mass: Dict[KeyTuple, int] = Field(default_factory=dict)
    maximum: Dict[KeyTuple, int] = Field(default_factory=dict)

    def level_mass(self) -> Dict[int, int]:
        """E_l: sum over all l-edge subgraphs H of the number of copies containing H"""
        out: Dict[int, int] = {}
        for (l, _, _), mass in self.mass.items():
            out[l] = out.get(l, 0) + mass
        return dict(sorted(out.items()))


class SpreadReport(BaseModel):
    """Worst-case spread ratio over examined subgraphs"""
    family: str
    n: int
    mode: str
    examined: int
    copies: int
    worst_ratio: float
    worst_per_edge: float
    worst_subgraph: List[Tuple[int, int]] = Field(default_factory=list)
    per_level: Dict[int, float] = Field(default_factory=dict)
