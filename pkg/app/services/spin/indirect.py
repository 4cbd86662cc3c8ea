from __future__ import annotations

import logging
import math
from typing import List, Optional

import numpy as np

from app.core.config import settings
from app.exceptions.spin_exceptions import HoldoutInQuorumError, ValidationError
from app.schemas.indirect import BatteryEntry, BatteryReport, ConsistencyReport, IndirectResult
from app.schemas.measurement import Axis, IntensityTable, QuorumSpec, TableMode
from app.schemas.reconstruction import ReconResult
from app.schemas.spin import DensityMatrix, GenericOperator, PureState, SpinValue
from app.services.common.thread_pool import thread_pool_service
from app.services.spin.core import SpinCoreService
from app.services.spin.measurement import MeasurementService, axis_generator, inverse_cdf_counts
from app.services.spin.recon_mixed import ReconMixedService, axis_block
from app.services.spin.recon_pure import ReconPureService

logger = logging.getLogger(__name__)


def random_axis(rng: np.random.Generator) -> Axis:
    return Axis(theta=float(np.arccos(1.0 - 2.0 * rng.random())), phi=float(2.0 * math.pi * rng.random()))


class IndirectService:
    @staticmethod
    def reconstruct(
        table: IntensityTable,
        quorum: Optional[QuorumSpec] = None,
        pure: bool = False,
        allow_minimum_norm: bool = False,
    ) -> ReconResult:
        """Mixed path through the measurement map, pure path through the tripod phase fit"""
        if not pure:
            return ReconMixedService.reconstruct_mixed(table, quorum, allow_minimum_norm)
        if quorum is not None and not quorum.matches(table.axes):
            raise ValidationError(message="Table axes do not match the quorum")
        result = ReconPureService.reconstruct_pure(table)
        return ReconResult(
            rho_hat=result.state.to_density(),
            residual=result.residual,
            injective=True,
            method="pure-tripod",
        )

    @staticmethod
    def indirect_expectation(
        table: IntensityTable,
        quorum: Optional[QuorumSpec],
        operator: GenericOperator,
        pure: bool = False,
    ) -> IndirectResult:
        """Tr(rho_hat O) with rho_hat reconstructed from the quorum data alone; O need not be hermitean"""
        quorum = table.quorum if quorum is None else quorum
        recon = IndirectService.reconstruct(table, quorum, pure)
        value = SpinCoreService.expectation(recon.rho_hat, operator)
        return IndirectResult(value=value, rho_source=recon, quorum=quorum)

    @staticmethod
    def operator_battery(spin: SpinValue, seed: Optional[int] = None) -> List[GenericOperator]:
        """
        Fixed catalogue: identity, spin components and squares, powers of n.S along random
        axes, ladder operators, random hermitean and non-hermitean matrices
        """
        rng = np.random.default_rng(settings.SEED if seed is None else seed)
        ops = SpinCoreService.spin_operators(spin)
        d = spin.dimension()

        catalogue = [
            ("identity", np.eye(d)),
            ("sx", ops.sx),
            ("sy", ops.sy),
            ("sz", ops.sz),
            ("sx^2", ops.sx @ ops.sx),
            ("sz^2", ops.sz @ ops.sz),
            ("s+", ops.splus),
            ("s-", ops.sminus),
            ("s+^2", ops.splus @ ops.splus),
            ("s+ sz", ops.splus @ ops.sz),
        ]
        for index in range(3):
            axis = random_axis(rng)
            component = ops.along(axis.vector)
            for power in (1, 2, 3):
                catalogue.append((f"sn{index}^{power}", np.linalg.matrix_power(component, power)))
        for index in range(3):
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            catalogue.append((f"hermitean{index}", a + a.conj().T))
        for index in range(3):
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            catalogue.append((f"general{index}", a))
        return [GenericOperator(spin=spin, matrix=matrix, name=name) for name, matrix in catalogue]

    @staticmethod
    def run_battery(
        rho: DensityMatrix,
        quorum: QuorumSpec,
        seed: Optional[int] = None,
        pure: bool = False,
        operators: Optional[List[GenericOperator]] = None,
    ) -> BatteryReport:
        """Indirect versus direct expectation for every operator of the battery on exact data"""
        operators = IndirectService.operator_battery(rho.spin, seed) if operators is None else operators
        source = PureState.from_vector(rho.spin, np.linalg.eigh(rho.matrix)[1][:, -1]) if pure else rho
        table = MeasurementService.measure_exact(source, quorum)
        recon = IndirectService.reconstruct(table, quorum, pure)
        truth = SpinCoreService.as_density(source)

        def evaluate(operator: GenericOperator) -> BatteryEntry:
            indirect = SpinCoreService.expectation(recon.rho_hat, operator)
            direct = SpinCoreService.expectation(truth, operator)
            return BatteryEntry(
                name=operator.name or "operator",
                hermitean=operator.is_hermitean(),
                indirect=indirect,
                direct=direct,
                deviation=abs(indirect - direct),
            )

        entries = thread_pool_service.map_ordered(evaluate, operators)
        max_deviation = max(entry.deviation for entry in entries)
        logger.info(f"Operator battery of {len(entries)} for spin {rho.spin.label}: max deviation {max_deviation:.3e}")
        return BatteryReport(operators=len(entries), max_deviation=max_deviation, entries=entries)

    @staticmethod
    def check_holdout(quorum: QuorumSpec, holdout: Axis):
        for index, axis in enumerate(quorum.axes):
            angle = axis.angle_to(holdout)
            if angle <= settings.HOLDOUT_MIN_ANGLE:
                raise HoldoutInQuorumError(angle, index)

    @staticmethod
    def prediction_variance(
        spin: SpinValue, quorum: QuorumSpec, holdout: Axis, fitted: np.ndarray, shots: int
    ) -> np.ndarray:
        """
        Variance of the predicted holdout probabilities, propagating the multinomial covariance of
        every quorum axis through the least-squares map
        """
        measurement_map = ReconMixedService.build_map(spin, quorum, verify=False)
        gain = axis_block(spin, holdout)[:, 1:] @ np.linalg.pinv(measurement_map.matrix[:, 1:])
        d = spin.dimension()
        variance = np.zeros(d)
        for k in range(len(quorum)):
            p = np.clip(fitted[k], 0.0, 1.0)
            covariance = (np.diag(p) - np.outer(p, p)) / shots
            block = gain[:, k * d:(k + 1) * d]
            variance += np.einsum("ij,jk,ik->i", block, covariance, block)
        return variance

    @staticmethod
    def consistency_test(
        rho_true: DensityMatrix,
        quorum: QuorumSpec,
        holdout: Axis,
        shots: Optional[int] = None,
        seed: Optional[int] = None,
        table: Optional[IntensityTable] = None,
    ) -> ConsistencyReport:
        """
        Compare the holdout intensities measured directly with those predicted by the state
        reconstructed from the quorum. A prepared quorum table may replace the simulated one.
        """
        IndirectService.check_holdout(quorum, holdout)
        spin = rho_true.spin
        seed = settings.SEED if seed is None else seed
        exact_probabilities = MeasurementService.sg_probabilities(rho_true, holdout)

        if shots is None:
            table = MeasurementService.measure_exact(rho_true, quorum) if table is None else table
            recon = ReconMixedService.reconstruct_mixed(table, quorum)
            predicted = MeasurementService.sg_probabilities(recon.rho_hat, holdout)
            difference = np.abs(predicted - exact_probabilities)
            max_difference = float(difference.max())
            passed = max_difference <= settings.EXACT_RESIDUAL_TOLERANCE
            logger.info(f"Exact consistency at holdout theta={holdout.theta:.4f}: max |dp| {max_difference:.3e}")
            return ConsistencyReport(
                mode=TableMode.EXACT.value,
                holdout_theta=holdout.theta,
                holdout_phi=holdout.phi,
                direct=exact_probabilities.tolist(),
                predicted=predicted.tolist(),
                max_abs_difference=max_difference,
                quorum_residual=recon.residual,
                passed=passed,
            )

        if shots < 1:
            raise ValidationError(message=f"shots must be at least 1, got {shots}")
        table = MeasurementService.measure_sampled(rho_true, quorum, shots, seed) if table is None else table
        recon = ReconMixedService.reconstruct_mixed(table, quorum)
        predicted = MeasurementService.sg_probabilities(recon.rho_hat, holdout)

        # holdout uses the stream after the quorum axes
        counts = inverse_cdf_counts(exact_probabilities, shots, axis_generator(seed, len(quorum)))
        direct = counts / float(shots)

        fitted = np.array([MeasurementService.sg_probabilities(recon.rho_hat, axis) for axis in quorum.axes])
        variance = predicted * (1.0 - predicted) / shots
        variance = variance + IndirectService.prediction_variance(spin, quorum, holdout, fitted, shots)
        variance = np.maximum(variance, 1.0 / shots ** 2)
        z_scores = (direct - predicted) / np.sqrt(variance)
        max_z = float(np.max(np.abs(z_scores)))
        passed = max_z <= settings.CONSISTENCY_Z_THRESHOLD
        logger.info(f"Sampled consistency ({shots} shots, seed {seed}): max |z| {max_z:.3f}, passed {passed}")
        return ConsistencyReport(
            mode=TableMode.SAMPLED.value,
            holdout_theta=holdout.theta,
            holdout_phi=holdout.phi,
            direct=direct.tolist(),
            predicted=predicted.tolist(),
            max_abs_difference=float(np.max(np.abs(direct - predicted))),
            z_scores=z_scores.tolist(),
            max_abs_z=max_z,
            quorum_residual=recon.residual,
            passed=passed,
        )


indirect_service = IndirectService()
