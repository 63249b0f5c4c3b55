"""
Result emitters: JSON artifacts and plot-ready CSV tables

Every JSON artifact carries the config it was produced from, the seeds, the
mode flags and an artifact version, serialized with sorted keys so identical
inputs give identical bytes.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import pandas as pd
from pydantic import BaseModel

from .. import __version__
from ..core.config import settings
from ..core.exceptions import ParameterError
from ..models.analytics import CurvePoint
from ..models.census import CensusTable
from ..models.experiment import ExperimentConfig
from ..models.fragment import FragmentTrace

CURVE_COLUMNS = ["p", "successes", "decided", "inconclusive", "ci_lo", "ci_hi"]


def artifact_version() -> str:
    return settings.artifact_version or __version__


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def build_artifact(
    payload: Any,
    config: Optional[ExperimentConfig] = None,
    seeds: Optional[Dict[str, Any]] = None,
    mode: Optional[str] = None,
) -> Dict[str, Any]:
    """Wrap a result with the metadata needed to replay it"""
    return {
        "artifact_version": artifact_version(),
        "config": config.to_dict() if config is not None else None,
        "seeds": seeds or ({"master": config.seed} if config is not None else {}),
        "mode": mode or (config.mode if config is not None else None),
        "result": _plain(payload),
    }


def to_json(artifact: Dict[str, Any]) -> str:
    return json.dumps(artifact, sort_keys=True, indent=2, allow_nan=True) + "\n"


def curve_frame(curve: Iterable[CurvePoint]) -> pd.DataFrame:
    rows = [
        {"p": c.p, "successes": c.successes, "decided": c.decided, "inconclusive": c.inconclusive,
         "ci_lo": c.ci_low, "ci_hi": c.ci_high}
        for c in sorted(curve, key=lambda c: c.p)
    ]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def fragment_histogram_frame(trace: FragmentTrace) -> pd.DataFrame:
    """One row per (round, fragment size) with the number of instances"""
    rows: List[Dict[str, Any]] = []
    for record in trace.rounds:
        sizes = pd.Series([s for s in record.sizes if s is not None], dtype="int64")
        for size, count in sizes.value_counts().sort_index().items():
            rows.append({"round": record.name, "size": int(size), "instances": int(count)})
    return pd.DataFrame(rows, columns=["round", "size", "instances"])


def to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format="%.10g", lineterminator="\n")


def emit_results(
    result: Union[FragmentTrace, CensusTable, List[CurvePoint], BaseModel, Dict[str, Any]],
    fmt: str,
    path: Optional[Union[str, Path]] = None,
    config: Optional[ExperimentConfig] = None,
    seeds: Optional[Dict[str, Any]] = None,
    mode: Optional[str] = None,
) -> str:
    """Serialize a trace, table or curve as json or csv; written to path when given"""
    if fmt == "json":
        text = to_json(build_artifact(result, config, seeds, mode))
    elif fmt == "csv":
        if isinstance(result, CensusTable):
            text = to_csv(result.to_frame())
        elif isinstance(result, FragmentTrace):
            text = to_csv(fragment_histogram_frame(result))
        elif isinstance(result, list) and all(isinstance(c, CurvePoint) for c in result):
            text = to_csv(curve_frame(result))
        else:
            raise ParameterError(f"no CSV layout for {type(result).__name__}")
    else:
        raise ParameterError(f"Unknown output format '{fmt}', expected json or csv")
    if path is not None:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
    return text
