"""
Analysis result models: boundaries, condition verdicts, claim reports, threshold curves
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class ConditionId(str, Enum):
    """Hypotheses that can be certified on a concrete graph"""
    LOCAL_SPARSITY = "local_sparsity"
    LOCAL_EXPANSION = "local_expansion"
    GROWING_BOUNDARY = "growing_boundary"
    RIGID_BOUNDARY = "rigid_boundary"
    DOUBLE_DEGREE = "double_degree"
    CYCLIC_SHIFT = "cyclic_shift"


class BoundaryReport(BaseModel):
    """Edge and vertex boundary of a subgraph of a host"""
    subject: List[int]
    edge_boundary_size: int
    vertex_boundary: List[int]
    is_closed: bool = False
    induced: bool = True


class ConditionVerdict(BaseModel):
    """Outcome of one hypothesis check"""
    condition: ConditionId
    params: Dict[str, Any] = Field(default_factory=dict)
    holds: bool
    witness: Optional[List[int]] = None
    inconclusive: bool = False
    vacuous: bool = False
    reached: Optional[int] = None
    stats: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _witness_iff_violation(self):
        if self.holds and self.witness is not None:
            raise ValueError("a holding verdict cannot carry a witness")
        if not self.holds and self.witness is None:
            raise ValueError("a violated verdict needs a witness")
        return self


class ClaimViolation(BaseModel):
    """One counterexample found while verifying the closed-subgraph claims"""
    claim: str
    subject: List[int]
    detail: str


class ClosedClaimsReport(BaseModel):
    """Exact verification of the closed-subgraph structure claims"""
    n: int
    d: int
    v_max: int
    closed_counts: Dict[int, int] = Field(default_factory=dict)
    min_degree_observed: Optional[int] = None
    max_pair_count: int = 0
    max_prefix_ratio: float = 0.0
    violations: List[ClaimViolation] = Field(default_factory=list)
    precondition_failed: bool = False
    precondition_witness: Optional[List[int]] = None
    inconclusive: bool = False

    @property
    def passed(self) -> bool:
        return not self.precondition_failed and not self.violations and not self.inconclusive


class CurvePoint(BaseModel):
    """Containment frequency at one edge density"""
    p: float = Field(..., ge=0.0, le=1.0)
    successes: int = Field(..., ge=0)
    decided: int = Field(..., ge=0)
    inconclusive: int = Field(..., ge=0)
    ci_low: float
    ci_high: float

    @property
    def fraction(self) -> float:
        return self.successes / self.decided if self.decided else float("nan")

    @property
    def inconclusive_fraction(self) -> float:
        total = self.decided + self.inconclusive
        return self.inconclusive / total if total else 0.0

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2.0


class ThresholdEstimate(BaseModel):
    """Empirical finite-n median point of the containment curve"""
    n: int
    family: str
    p_hat: Optional[float] = None
    bracket: List[float] = Field(default_factory=list)
    curve: List[CurvePoint] = Field(default_factory=list)
    trials_per_probe: int
    seeds: List[int] = Field(default_factory=list)
    p_expectation: Optional[float] = None
    p_reference: Optional[float] = None
    p_refined_upper: Optional[float] = None
    anomaly: bool = False
    degenerate: bool = False
    discarded_probes: List[float] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
