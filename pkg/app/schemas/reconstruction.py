from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from app.exceptions.spin_exceptions import ValidationError
from app.schemas.base import BaseSchema, ReportSchema, frozen_array
from app.schemas.measurement import QuorumSpec
from app.schemas.spin import DensityMatrix, PureState, SpinValue


class MeasurementMap(BaseSchema):
    """
    Real linear map from hermitean-basis coordinates (first basis element I/sqrt(d))
    to the stacked outcome probabilities of a quorum
    """

    spin: SpinValue
    quorum: QuorumSpec
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    condition_number: float  # of the restriction to the trace-one slice; inf when not injective

    @field_validator("matrix", "singular_values", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, float)

    @property
    def parameter_count(self) -> int:
        return self.spin.dimension() ** 2

    @property
    def injective(self) -> bool:
        return self.rank == self.parameter_count

    @property
    def deficit(self) -> int:
        return self.parameter_count - self.rank


class ReconResult(BaseSchema):
    """Reconstructed density matrix with fit diagnostics"""

    rho_hat: DensityMatrix
    residual: float  # l2 misfit before positivity projection
    injective: bool
    rank: Optional[int] = None
    condition_number: Optional[float] = None
    projected: bool = False
    method: str = "linear-inversion"


class QuorumCertificate(ReportSchema):
    spin: str
    axis_count: int
    parameters: int
    rank: int
    deficit: int
    injective: bool
    condition_number: float
    counting_bound: int  # min(d^2, 2sK + 1)
    multipole_bound: int  # 1 + sum_l min(K, 2l + 1)
    minimal_injective_axes: int  # 4s + 1
    note: str


class DesignResult(ReportSchema):
    spin: str
    strategy: str
    axis_count: int
    condition_number: float
    opening_angle: Optional[float] = None
    candidates: int
    injective_candidates: int
    quorum: QuorumSpec


class PhaseVector(BaseSchema):
    """Relative phases chi_m, gauge-fixed to 0 at the first nonzero amplitude"""

    spin: SpinValue
    chi: np.ndarray

    @field_validator("chi", mode="before")
    @classmethod
    def _reduce(cls, value):
        chi = np.asarray(value, dtype=float).reshape(-1)
        # map into (-pi, pi]
        chi = math.pi - np.mod(math.pi - chi, 2.0 * math.pi)
        return frozen_array(chi, float)

    @classmethod
    def of(cls, state: PureState, tolerance: float = 0.0) -> "PhaseVector":
        gauged = state.gauge_normal(tolerance)
        return cls(spin=state.spin, chi=np.angle(gauged.amplitudes))

    def differences(self) -> np.ndarray:
        """chi_{m+1} - chi_m along the descending basis order, reduced to (-pi, pi]"""
        delta = np.diff(self.chi)
        return math.pi - np.mod(math.pi - delta, 2.0 * math.pi)


class PhasePolynomial(BaseSchema):
    """f(x) = sum_sigma f_sigma x^sigma with degree <= 2s"""

    spin: SpinValue
    coefficients: np.ndarray

    @field_validator("coefficients", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(np.asarray(value, dtype=float).reshape(-1), float)

    @model_validator(mode="after")
    def _check(self):
        if self.coefficients.shape[0] > self.spin.two_s + 1:
            raise ValidationError(message=f"Phase polynomial degree exceeds 2s = {self.spin.two_s}")
        return self

    @classmethod
    def constant(cls, spin: SpinValue, value: float) -> "PhasePolynomial":
        return cls(spin=spin, coefficients=[value])

    def __call__(self, x) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coefficients)

    def is_constant(self, tolerance: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.coefficients[1:]) <= tolerance))


class PartnerSet(BaseSchema):
    """Nearby-axis partner candidates, one per distinct sign pattern"""

    candidates: Tuple[PureState, ...]
    signs: Tuple[Tuple[int, ...], ...]
    selected: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        if len(self.candidates) != len(self.signs):
            raise ValidationError(message="Every partner candidate needs its sign pattern")
        if self.candidates and len(self.candidates) > 2 ** self.candidates[0].spin.two_s:
            raise ValidationError(message="More candidates than sign patterns")
        return self

    def __len__(self) -> int:
        return len(self.candidates)

    @staticmethod
    def pattern_label(signs) -> str:
        return "".join("+" if sign > 0 else "-" for sign in signs) or "(none)"


class PureReconResult(BaseSchema):
    state: PureState
    residual: float
    seeds_tried: int
    pattern_index: int


class UniquenessReport(ReportSchema):
    spin: str
    trials: int
    best_ratio: float  # gauge-projected defect D / nu
    best_defect: float
    nonconstancy: float
    f: List[float] = Field(default_factory=list)
    g: List[float] = Field(default_factory=list)
    h: List[float] = Field(default_factory=list)


class NumberAudit(ReportSchema):
    spin: str
    axes: int
    values_per_axis: int
    normalizations: int
    measured_numbers: int
    expected: int  # 6s
    pure_parameters: int  # 4s
