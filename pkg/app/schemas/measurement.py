from __future__ import annotations

import math
from enum import Enum
from typing import Iterator, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from app.core.config import settings
from app.exceptions.spin_exceptions import DimensionMismatchError, ValidationError
from app.schemas.base import BaseSchema, frozen_array
from app.schemas.spin import SpinValue

TWO_PI = 2.0 * math.pi


class Axis(BaseSchema):
    """Stern-Gerlach orientation given by polar angle theta and azimuth phi"""

    theta: float = Field(..., ge=0.0, le=math.pi)
    phi: float = 0.0

    @field_validator("phi", mode="before")
    @classmethod
    def _reduce_phi(cls, value):
        value = math.fmod(float(value), TWO_PI)
        if value < 0:
            value += TWO_PI
        # fmod can land on 2*pi after the shift by round-off
        return 0.0 if value >= TWO_PI else value

    @classmethod
    def from_vector(cls, vector, tolerance: float = None) -> "Axis":
        """Axis of a unit 3-vector; vectors off the unit sphere are rejected"""
        tolerance = settings.AXIS_TOLERANCE if tolerance is None else tolerance
        vector = np.asarray(vector, dtype=float).reshape(-1)
        if vector.shape != (3,):
            raise ValidationError(message=f"Axis vector must have 3 components, got {vector.shape[0]}")
        norm = float(np.linalg.norm(vector))
        if abs(norm - 1.0) > tolerance:
            raise ValidationError(message=f"Axis vector is not a unit vector (norm {norm!r})")
        x, y, z = vector / norm
        theta = math.acos(max(-1.0, min(1.0, z)))
        phi = math.atan2(y, x) if (x != 0.0 or y != 0.0) else 0.0
        return cls(theta=theta, phi=phi)

    @classmethod
    def x(cls) -> "Axis":
        return cls(theta=math.pi / 2, phi=0.0)

    @classmethod
    def y(cls) -> "Axis":
        return cls(theta=math.pi / 2, phi=math.pi / 2)

    @classmethod
    def z(cls) -> "Axis":
        return cls(theta=0.0, phi=0.0)

    @property
    def vector(self) -> np.ndarray:
        sin_theta = math.sin(self.theta)
        return np.array([sin_theta * math.cos(self.phi), sin_theta * math.sin(self.phi), math.cos(self.theta)])

    def angle_to(self, other: "Axis") -> float:
        # atan2 of |a x b| and a.b stays accurate near 0 and pi, where acos loses half the digits
        mine, theirs = self.vector, other.vector
        return math.atan2(float(np.linalg.norm(np.cross(mine, theirs))), float(np.dot(mine, theirs)))


class QuorumKind(str, Enum):
    CONE = "cone"
    TRIPOD = "tripod"
    EXPLICIT = "explicit"


class QuorumSpec(BaseSchema):
    """Ordered list of measurement axes with the geometry that produced it"""

    kind: QuorumKind = QuorumKind.EXPLICIT
    axes: Tuple[Axis, ...]
    opening_angle: Optional[float] = None  # cone only
    axis_count: Optional[int] = None  # cone only

    @model_validator(mode="after")
    def _check(self):
        if not self.axes:
            raise ValidationError(message="Quorum needs at least one axis")
        return self

    @classmethod
    def explicit(cls, axes) -> "QuorumSpec":
        return cls(kind=QuorumKind.EXPLICIT, axes=tuple(axes))

    def __len__(self) -> int:
        return len(self.axes)

    def with_axis(self, axis: Axis) -> "QuorumSpec":
        return QuorumSpec(kind=QuorumKind.EXPLICIT, axes=self.axes + (axis,))

    def matches(self, axes, tolerance: float = 1e-9) -> bool:
        """Same axes in the same order, within an angular tolerance"""
        axes = tuple(axes)
        if len(axes) != len(self.axes):
            return False
        return all(mine.angle_to(other) <= tolerance for mine, other in zip(self.axes, axes))


class TableMode(str, Enum):
    EXACT = "exact"
    SAMPLED = "sampled"


class IntensityTable(BaseSchema):
    """Outcome probabilities p_m^(k) per axis k (rows) and outcome m (columns, descending m)"""

    spin: SpinValue
    axes: Tuple[Axis, ...]
    probabilities: np.ndarray
    mode: TableMode = TableMode.EXACT
    counts: Optional[np.ndarray] = None
    shots: Optional[int] = None
    seed: Optional[int] = None

    @field_validator("probabilities", mode="before")
    @classmethod
    def _freeze_probabilities(cls, value):
        return frozen_array(value, float)

    @field_validator("counts", mode="before")
    @classmethod
    def _freeze_counts(cls, value):
        return None if value is None else frozen_array(value, np.int64)

    @model_validator(mode="after")
    def _check(self):
        shape = (len(self.axes), self.spin.dimension())
        if self.probabilities.shape != shape:
            raise DimensionMismatchError(message=f"Table has shape {self.probabilities.shape}, expected {shape}")
        if np.any(self.probabilities < 0.0) or np.any(self.probabilities > 1.0):
            raise ValidationError(message="Probabilities must lie in [0, 1]")
        if self.mode == TableMode.EXACT:
            sums = self.probabilities.sum(axis=1)
            worst = float(np.max(np.abs(sums - 1.0)))
            if worst > settings.NORM_TOLERANCE * max(1, self.spin.dimension()):
                raise ValidationError(message=f"Exact table rows do not sum to one (deviation {worst:.3e})")
        else:
            if self.counts is None or self.shots is None:
                raise ValidationError(message="Sampled table needs counts and shots")
            if self.counts.shape != shape:
                raise DimensionMismatchError(message=f"Counts have shape {self.counts.shape}, expected {shape}")
            if np.any(self.counts < 0) or np.any(self.counts.sum(axis=1) != self.shots):
                raise ValidationError(message=f"Counts per axis must be non-negative and sum to {self.shots}")
        return self

    @classmethod
    def from_counts(cls, spin: SpinValue, axes, counts, shots: int, seed: Optional[int] = None) -> "IntensityTable":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(
            spin=spin,
            axes=tuple(axes),
            probabilities=counts / float(shots),
            mode=TableMode.SAMPLED,
            counts=counts,
            shots=shots,
            seed=seed,
        )

    @property
    def quorum(self) -> QuorumSpec:
        return QuorumSpec.explicit(self.axes)

    def stacked(self) -> np.ndarray:
        """Probabilities flattened axis-major, matching the measurement-map row order"""
        return self.probabilities.reshape(-1)

    def rows(self) -> Iterator[tuple]:
        """(k, axis, m index, value) with value the count for sampled tables"""
        values = self.counts if self.mode == TableMode.SAMPLED else self.probabilities
        for k, axis in enumerate(self.axes):
            for j in range(self.spin.dimension()):
                yield k, axis, j, values[k, j]
