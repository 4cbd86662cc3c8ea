from __future__ import annotations

from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import field_validator, model_validator

from app.core.config import settings
from app.exceptions.spin_exceptions import DimensionMismatchError, ValidationError
from app.schemas.base import BaseSchema, ReportSchema, frozen_array
from app.schemas.measurement import QuorumSpec
from app.schemas.spin import SpinValue


class Hamiltonian(BaseSchema):
    spin: SpinValue
    matrix: np.ndarray
    label: str = "custom"

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, complex)

    @model_validator(mode="after")
    def _check(self):
        d = self.spin.dimension()
        if self.matrix.shape != (d, d):
            raise DimensionMismatchError(message=f"Hamiltonian has shape {self.matrix.shape}, expected ({d}, {d})")
        deviation = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if deviation > settings.HERMITICITY_TOLERANCE:
            raise ValidationError(message=f"Hamiltonian is not hermitean (deviation {deviation:.3e})")
        return self


class QuorumTrajectory(BaseSchema):
    """Quorum probabilities p_m^(k)(t) on a time grid, shape (times, axes, outcomes)"""

    spin: SpinValue
    quorum: QuorumSpec
    times: np.ndarray
    values: np.ndarray

    @field_validator("times", "values", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, float)

    @model_validator(mode="after")
    def _check(self):
        if self.times.ndim != 1 or self.times.size == 0:
            raise ValidationError(message="Time grid must be a non-empty 1-d array")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError(message="Time grid must be strictly increasing")
        shape = (self.times.size, len(self.quorum), self.spin.dimension())
        if self.values.shape != shape:
            raise DimensionMismatchError(message=f"Trajectory values have shape {self.values.shape}, expected {shape}")
        return self

    def to_frame(self) -> pd.DataFrame:
        """Plot-ready long table with columns t k m p"""
        n_times, n_axes, d = self.values.shape
        m_labels = [self.spin.m_label(j) for j in range(d)]
        return pd.DataFrame({
            "t": np.repeat(self.times, n_axes * d),
            "k": np.tile(np.repeat(np.arange(n_axes), d), n_times),
            "m": np.tile(m_labels, n_times * n_axes),
            "p": self.values.reshape(-1),
        })


class ClosureReport(ReportSchema):
    spin: str
    hamiltonian: str
    steps: int
    max_deviation: float
    deviations: List[float]
    mode: str


class GeneratorReport(ReportSchema):
    spin: str
    hamiltonian: str
    dt: float
    max_gap: float
    finite_difference: List[List[float]]
    commutator: List[List[float]]


class ConservationReport(ReportSchema):
    norm_drift: float
    trace_drift: float
    purity_drift: float
    energy_drift: float
    horizon: Optional[float] = None
