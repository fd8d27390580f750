"""
Pydantic Schemas
Run configuration and report file models
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models import Box, Direction, Point


# Config Schemas
class MetricSpec(BaseModel):
    builder: str
    params: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(extra="forbid")


class FamilySpec(BaseModel):
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(extra="forbid")


class Tolerances(BaseModel):
    """Per-check thresholds; unset values fall back to settings"""
    douglas: Optional[float] = Field(None, gt=0)
    hamel: Optional[float] = Field(None, gt=0)
    class_: Optional[float] = Field(None, gt=0, alias="class")
    closed: Optional[float] = Field(None, gt=0)
    b_constant: Optional[float] = Field(None, gt=0)
    conformal: Optional[float] = Field(None, gt=0)
    spray: Optional[float] = Field(None, gt=0)
    geodesic: Optional[float] = Field(None, gt=0)

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class TraceStart(BaseModel):
    x1: float
    x2: float
    y1: float
    y2: float

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def nonzero_direction(self) -> "TraceStart":
        if self.y1 == 0.0 and self.y2 == 0.0:
            raise ValueError("initial direction must be nonzero")
        return self

    @property
    def point(self) -> Point:
        return Point(self.x1, self.x2)

    @property
    def direction(self) -> Direction:
        return Direction(self.y1, self.y2)


class RunConfig(BaseModel):
    schema_version: int = 1
    name: str = "run"
    metric: MetricSpec
    family: Optional[FamilySpec] = None
    domain: Optional[List[float]] = None
    grid: Optional[int] = Field(None, ge=3)
    angles: Optional[int] = Field(None, ge=8)
    directions: Optional[int] = Field(None, ge=4)
    margin: Optional[float] = Field(None, ge=0, lt=0.5)
    seed: Optional[int] = None
    samples: Optional[int] = Field(None, ge=1)
    s_limit: Optional[float] = Field(None, gt=0, le=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    class_params: Dict[str, Any] = Field(default_factory=dict)
    checks: List[str] = Field(default_factory=lambda: ["douglas"])
    traces: List[TraceStart] = Field(default_factory=list)
    n_traces: Optional[int] = Field(None, ge=1)
    arclength: Optional[float] = Field(None, gt=0)
    steps: Optional[int] = Field(None, ge=8)
    output: Optional[str] = None

    model_config = ConfigDict(extra="forbid")

    @field_validator("domain")
    @classmethod
    def domain_is_box(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is None:
            return v
        if len(v) != 4:
            raise ValueError("domain must be [lo1, hi1, lo2, hi2]")
        Box(*v)
        return v

    @property
    def box(self) -> Optional[Box]:
        return Box(*self.domain) if self.domain else None

    def echo(self) -> Dict[str, Any]:
        """JSON-ready form that re-parses to an equal config"""
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


# Report Schemas
class ExclusionSummary(BaseModel):
    included: int
    excluded: int
    flagged: int
    excluded_fraction: float
    reasons: Dict[str, int]


class CheckReport(BaseModel):
    check: str
    grid: str
    tolerance: float
    verdict: str
    finding: str = ""
    max_residual: Optional[float] = None
    mean_residual: Optional[float] = None
    points: List[List[float]] = Field(default_factory=list)
    residuals: List[Optional[float]] = Field(default_factory=list)
    recovered: Dict[str, List[Any]] = Field(default_factory=dict)
    exclusions: Optional[ExclusionSummary] = None
    details: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None


class ReportFile(BaseModel):
    schema_version: int
    tool: str
    version: str
    config: Dict[str, Any]
    checks: List[CheckReport]
    verdict: str
    wall_clock: float


class TraceSummary(BaseModel):
    index: int
    start: List[float]
    direction: List[float]
    file: Optional[str] = None
    points: int = 0
    deviation: Optional[float] = None
    truncated: bool = False
    reason: str = ""
    endpoint_error: Optional[float] = None


class TraceSummaryFile(BaseModel):
    schema_version: int
    config: Dict[str, Any]
    traces: List[TraceSummary]
    max_deviation: Optional[float] = None
    verdict: str
    wall_clock: float
