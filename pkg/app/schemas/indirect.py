from __future__ import annotations

from typing import List, Optional

from pydantic import Field

from app.schemas.base import BaseSchema, ReportSchema
from app.schemas.measurement import QuorumSpec
from app.schemas.reconstruction import ReconResult


class IndirectResult(BaseSchema):
    """Expectation value computed from the reconstructed state, never measured directly"""

    value: complex
    rho_source: ReconResult
    quorum: QuorumSpec


class BatteryEntry(ReportSchema):
    name: str
    hermitean: bool
    indirect: complex
    direct: complex
    deviation: float


class BatteryReport(ReportSchema):
    operators: int
    max_deviation: float
    entries: List[BatteryEntry] = Field(default_factory=list)


class ConsistencyReport(ReportSchema):
    mode: str
    holdout_theta: float
    holdout_phi: float
    direct: List[float]
    predicted: List[float]
    max_abs_difference: float
    z_scores: Optional[List[float]] = None
    max_abs_z: Optional[float] = None
    quorum_residual: float
    passed: bool
