from __future__ import annotations

import numpy as np
from pydantic import field_validator, model_validator

from app.exceptions.spin_exceptions import ValidationError
from app.schemas.base import BaseSchema, ReportSchema, frozen_array


class GridWavefunction(BaseSchema):
    """Wave function sampled on the uniform grid x_j = -L + j*dx, j = 0..N-1, dx = 2L/N"""

    n_points: int
    half_width: float
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(np.asarray(value, dtype=complex).reshape(-1), complex)

    @model_validator(mode="after")
    def _check(self):
        if self.n_points < 2 or self.n_points % 2:
            raise ValidationError(message=f"Grid needs an even number of points, got {self.n_points}")
        if self.half_width <= 0:
            raise ValidationError(message="Grid half width must be positive")
        if self.values.shape[0] != self.n_points:
            raise ValidationError(message="Grid values do not match the number of points")
        norm = float(np.sum(np.abs(self.values) ** 2) * self.dx)
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(message=f"Grid wave function is not normalized (norm {norm!r})")
        return self

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def x(self) -> np.ndarray:
        # (j - N/2) dx equals -L + j dx and negates exactly under the mirror map
        return self.dx * (np.arange(self.n_points) - self.n_points // 2)

    def mirrored(self) -> np.ndarray:
        """Values at -x: index j maps to (N - j) mod N, -L identified with L"""
        return self.values[(-np.arange(self.n_points)) % self.n_points]


class PartnerCheckReport(ReportSchema):
    n_points: int
    half_width: float
    position_gap: float
    momentum_gap: float
    parseval_gap: float
    overlap: float  # |<psi | psi*>|
    gram_determinant: float
    independent: bool
    degenerate: bool
    passed: bool
