from __future__ import annotations

import logging
import math
from typing import Optional, Union

import numpy as np

from app.core.config import settings
from app.exceptions.spin_exceptions import (
    InconsistentDataError,
    NoInjectiveConfigurationError,
    NotTripodError,
    ValidationError,
)
from app.schemas.measurement import Axis, IntensityTable, QuorumKind, QuorumSpec, TableMode
from app.schemas.spin import DensityMatrix, PureState, SpinValue
from app.services.common.thread_pool import thread_pool_service
from app.services.spin.core import SpinCoreService

logger = logging.getLogger(__name__)

StateLike = Union[PureState, DensityMatrix]


def clamp_probabilities(p: np.ndarray) -> np.ndarray:
    """
    Clip round-off negatives to zero and renormalize.

    Deviations larger than the round-off tolerance mean a bug or a bad state, not noise.
    """
    total = float(p.sum())
    if abs(total - 1.0) > settings.PROBABILITY_ROUNDOFF or float(p.min()) < -settings.PROBABILITY_ROUNDOFF:
        raise InconsistentDataError(
            message=f"Outcome probabilities are not a distribution (sum {total!r}, min {float(p.min())!r})",
        )
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def axis_probabilities(state: StateLike, unitary: np.ndarray) -> np.ndarray:
    """p_m = (U^dagger rho U)_mm for the rotated basis in the columns of U"""
    if isinstance(state, PureState):
        p = np.abs(unitary.conj().T @ state.amplitudes) ** 2
    else:
        p = np.einsum("im,ij,jm->m", unitary.conj(), state.matrix, unitary).real
    return clamp_probabilities(p)


def inverse_cdf_counts(probabilities: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """One multinomial draw of size shots by inverting the cumulative distribution"""
    cdf = np.cumsum(probabilities)
    cdf[-1] = 1.0
    outcomes = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.bincount(outcomes, minlength=probabilities.size)[: probabilities.size]


def axis_generator(seed: int, axis_index: int) -> np.random.Generator:
    """Per-axis stream derived from (seed, axis index) so parallel and serial runs agree"""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(axis_index,)))


class MeasurementService:
    @staticmethod
    def sg_probabilities(rho: StateLike, axis: Axis) -> np.ndarray:
        """Stern-Gerlach outcome probabilities along an axis, descending m"""
        unitary = SpinCoreService.rotation_to_axis(rho.spin, axis)
        return axis_probabilities(rho, unitary)

    @staticmethod
    def cone_axes(spin: SpinValue, count: int, theta: Optional[float] = None) -> QuorumSpec:
        """
        count axes at polar angle theta with azimuths 2*pi*k/count.

        Without theta the angle comes from the cone-scan conditioning search,
        falling back to the configured default when no angle is injective.
        """
        if count < 1:
            raise ValidationError(message=f"Cone needs at least one axis, got {count}")
        if theta is None:
            theta = MeasurementService.default_cone_angle(spin, count)
        if not 0.0 < theta < math.pi:
            raise ValidationError(message=f"Cone opening angle must lie strictly between 0 and pi (all axes coincide), got {theta!r}")
        axes = tuple(Axis(theta=theta, phi=2.0 * math.pi * k / count) for k in range(count))
        return QuorumSpec(kind=QuorumKind.CONE, axes=axes, opening_angle=theta, axis_count=count)

    @staticmethod
    def default_cone_angle(spin: SpinValue, count: int) -> float:
        from app.services.spin.recon_mixed import recon_mixed_service

        try:
            design = recon_mixed_service.design_axes(spin, count, strategy="cone-scan")
            return design.opening_angle
        except NoInjectiveConfigurationError:
            logger.info(
                f"No injective cone for spin {spin.label} with {count} axes, using theta = {settings.DEFAULT_CONE_THETA}"
            )
            return settings.DEFAULT_CONE_THETA

    @staticmethod
    def triple_product(e1: Axis, e2: Axis, e3: Axis) -> float:
        return float(np.dot(e1.vector, np.cross(e2.vector, e3.vector)))

    @staticmethod
    def tripod_axes(e1: Axis = None, e2: Axis = None, e3: Axis = None) -> QuorumSpec:
        """Three axes not in a plane; defaults to {x, y, z}"""
        if e1 is None and e2 is None and e3 is None:
            e1, e2, e3 = Axis.x(), Axis.y(), Axis.z()
        if e1 is None or e2 is None or e3 is None:
            raise ValidationError(message="A tripod needs exactly three axes")
        product = MeasurementService.triple_product(e1, e2, e3)
        if abs(product) <= settings.AXIS_TOLERANCE:
            raise NotTripodError(product)
        return QuorumSpec(kind=QuorumKind.TRIPOD, axes=(e1, e2, e3))

    @staticmethod
    def measure_exact(rho: StateLike, quorum: QuorumSpec) -> IntensityTable:
        rows = [MeasurementService.sg_probabilities(rho, axis) for axis in quorum.axes]
        return IntensityTable(spin=rho.spin, axes=quorum.axes, probabilities=np.array(rows), mode=TableMode.EXACT)

    @staticmethod
    def measure_sampled(rho: StateLike, quorum: QuorumSpec, shots: int, seed: int = None) -> IntensityTable:
        """One multinomial sample of size shots per axis; counts and frequencies recorded"""
        if shots < 1:
            raise ValidationError(message=f"shots must be at least 1, got {shots}")
        seed = settings.SEED if seed is None else seed

        def sample(item):
            k, axis = item
            p = MeasurementService.sg_probabilities(rho, axis)
            return inverse_cdf_counts(p, shots, axis_generator(seed, k))

        counts = thread_pool_service.map_ordered(sample, list(enumerate(quorum.axes)))
        logger.debug(f"Sampled {shots} shots on {len(quorum)} axes (seed {seed})")
        return IntensityTable.from_counts(rho.spin, quorum.axes, np.array(counts), shots, seed)


measurement_service = MeasurementService()
