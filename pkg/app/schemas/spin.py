from __future__ import annotations

from fractions import Fraction
from typing import Optional

import numpy as np
from pydantic import Field, field_validator, model_validator

from app.core.config import settings
from app.exceptions.spin_exceptions import DimensionMismatchError, ValidationError
from app.schemas.base import BaseSchema, frozen_array


class SpinValue(BaseSchema):
    """Spin quantum number s stored exactly as the integer 2s"""

    two_s: int = Field(..., ge=0)

    @classmethod
    def parse(cls, text: str) -> "SpinValue":
        """Parse '3/2', '1', '1.5' or '2' into a SpinValue"""
        try:
            value = Fraction(str(text).strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(message=f"Invalid spin '{text}'")
        doubled = 2 * value
        if value < 0 or doubled.denominator != 1:
            raise ValidationError(message=f"Spin must be a non-negative half-integer, got '{text}'")
        return cls(two_s=int(doubled))

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def label(self) -> str:
        return str(self.two_s // 2) if self.two_s % 2 == 0 else f"{self.two_s}/2"

    def dimension(self) -> int:
        return self.two_s + 1

    def m_numerators(self) -> np.ndarray:
        """2m for every basis index, descending from 2s to -2s"""
        return np.arange(self.two_s, -self.two_s - 1, -2)

    def m_values(self) -> np.ndarray:
        return self.m_numerators() / 2

    def m_label(self, index: int) -> str:
        numerator = self.two_s - 2 * index
        return str(numerator // 2) if numerator % 2 == 0 else f"{numerator}/2"

    def m_halves(self, index: int) -> str:
        """m written over 2 whatever its parity, '2/2' for m = 1; the form used in data files"""
        return f"{self.two_s - 2 * index}/2"


def _check_square(matrix: np.ndarray, spin: SpinValue, what: str):
    d = spin.dimension()
    if matrix.shape != (d, d):
        raise DimensionMismatchError(
            message=f"{what} has shape {matrix.shape}, spin {spin.label} needs ({d}, {d})"
        )


class PureState(BaseSchema):
    """Amplitudes in the Sz eigenbasis, index 0 <-> m = s"""

    spin: SpinValue
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, complex).reshape(-1)

    @model_validator(mode="after")
    def _check(self):
        if self.amplitudes.shape[0] != self.spin.dimension():
            raise DimensionMismatchError(
                message=f"{self.amplitudes.shape[0]} amplitudes given, spin {self.spin.label} needs {self.spin.dimension()}"
            )
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > settings.NORM_TOLERANCE:
            raise ValidationError(message=f"State is not normalized: norm^2 = {norm!r}")
        return self

    @classmethod
    def from_vector(cls, spin: SpinValue, vector) -> "PureState":
        """Normalize an arbitrary nonzero vector into a state"""
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ValidationError(message="Zero vector is not a state")
        return cls(spin=spin, amplitudes=vector / norm)

    @classmethod
    def basis(cls, spin: SpinValue, index: int) -> "PureState":
        vector = np.zeros(spin.dimension(), dtype=complex)
        vector[index] = 1.0
        return cls(spin=spin, amplitudes=vector)

    def gauge_normal(self, tolerance: float = 0.0) -> "PureState":
        """Global phase fixed so the first nonzero amplitude is real and positive"""
        nonzero = np.flatnonzero(np.abs(self.amplitudes) > tolerance)
        if nonzero.size == 0:
            return self
        lead = self.amplitudes[nonzero[0]]
        return PureState(spin=self.spin, amplitudes=self.amplitudes * (abs(lead) / lead))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(spin=self.spin, matrix=np.outer(self.amplitudes, self.amplitudes.conj()))


class DensityMatrix(BaseSchema):
    """Hermitean, trace-one, positive-semidefinite matrix in the Sz eigenbasis"""

    spin: SpinValue
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze(cls, value):
        return np.array(value, dtype=complex, copy=True)

    @model_validator(mode="after")
    def _check(self):
        matrix = self.matrix
        _check_square(matrix, self.spin, "Density matrix")
        asymmetry = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
        if asymmetry > settings.HERMITICITY_TOLERANCE:
            raise ValidationError(message=f"Density matrix is not hermitean (deviation {asymmetry:.3e})")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > settings.NORM_TOLERANCE:
            raise ValidationError(message=f"Density matrix trace is {trace!r}, expected 1")
        hermitean = 0.5 * (matrix + matrix.conj().T)
        smallest = float(np.linalg.eigvalsh(hermitean)[0])
        if smallest < -settings.POSITIVITY_TOLERANCE:
            raise ValidationError(message=f"Density matrix has negative eigenvalue {smallest:.3e}")
        hermitean.setflags(write=False)
        object.__setattr__(self, "matrix", hermitean)
        return self

    @classmethod
    def maximally_mixed(cls, spin: SpinValue) -> "DensityMatrix":
        d = spin.dimension()
        return cls(spin=spin, matrix=np.eye(d) / d)


class SpinOperators(BaseSchema):
    """Spin components in units of hbar = 1"""

    spin: SpinValue
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @field_validator("sx", "sy", "sz", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, complex)

    @property
    def splus(self) -> np.ndarray:
        return self.sx + 1j * self.sy

    @property
    def sminus(self) -> np.ndarray:
        return self.sx - 1j * self.sy

    def along(self, direction) -> np.ndarray:
        """n . S for a 3-vector n"""
        nx, ny, nz = np.asarray(direction, dtype=float)
        return nx * self.sx + ny * self.sy + nz * self.sz


class GenericOperator(BaseSchema):
    """Any (2s+1)x(2s+1) matrix; hermiticity is not required"""

    spin: SpinValue
    matrix: np.ndarray
    name: Optional[str] = None

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, complex)

    @model_validator(mode="after")
    def _check(self):
        _check_square(self.matrix, self.spin, "Operator")
        return self

    def is_hermitean(self, tolerance: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tolerance)
