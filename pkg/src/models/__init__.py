"""
Data models for SpanLab
"""

from .graph import Graph, FamilySpec, FamilyKind, LabeledCopy
from .census import CensusKey, CensusTable, ExtensionProfile, SpreadReport
from .analytics import ConditionId, ConditionVerdict, ClosedClaimsReport, CurvePoint, ThresholdEstimate
from .fragment import Embedding, Fragment, DiamondLayout, FragmentTrace, RoundRecord, SearchResult, SearchStatus
from .experiment import ExperimentConfig, parse_config, dump_config

__all__ = [
    "Graph",
    "FamilySpec",
    "FamilyKind",
    "LabeledCopy",
    "CensusKey",
    "CensusTable",
    "ExtensionProfile",
    "SpreadReport",
    "ConditionId",
    "ConditionVerdict",
    "ClosedClaimsReport",
    "CurvePoint",
    "ThresholdEstimate",
    "Embedding",
    "Fragment",
    "DiamondLayout",
    "FragmentTrace",
    "RoundRecord",
    "SearchResult",
    "SearchStatus",
    "ExperimentConfig",
    "parse_config",
    "dump_config",
]
