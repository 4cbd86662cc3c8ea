from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from app.core.config import settings
from app.exceptions.spin_exceptions import (
    InconsistentDataError,
    NoInjectiveConfigurationError,
    NotInjectiveError,
    ValidationError,
)
from app.schemas.measurement import Axis, IntensityTable, QuorumKind, QuorumSpec, TableMode
from app.schemas.reconstruction import DesignResult, MeasurementMap, QuorumCertificate, ReconResult
from app.schemas.spin import DensityMatrix, SpinValue
from app.services.common.thread_pool import thread_pool_service
from app.services.spin.core import SpinCoreService
from app.services.spin.measurement import MeasurementService

logger = logging.getLogger(__name__)

STRATEGIES = ("cone-scan", "random-frames")


@lru_cache(maxsize=32)
def _hermitean_basis(two_s: int) -> np.ndarray:
    """Orthonormal hermitean basis: I/sqrt(d), then off-diagonal symmetric/antisymmetric pairs, then diagonal"""
    d = two_s + 1
    basis = [np.eye(d, dtype=complex) / math.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0 / math.sqrt(2.0)
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j / math.sqrt(2.0)
            anti[k, j] = 1j / math.sqrt(2.0)
            basis.extend([sym, anti])
    for level in range(1, d):
        diagonal = np.zeros(d)
        diagonal[:level] = 1.0
        diagonal[level] = -float(level)
        basis.append(np.diag(diagonal / math.sqrt(level * (level + 1))).astype(complex))
    stacked = np.array(basis)
    stacked.setflags(write=False)
    return stacked


def hermitean_basis(spin: SpinValue) -> np.ndarray:
    return _hermitean_basis(spin.two_s)


def to_coordinates(spin: SpinValue, matrix: np.ndarray) -> np.ndarray:
    """Real coordinates c_a = Tr(rho B_a) of a hermitean matrix"""
    return np.einsum("ij,aji->a", matrix, hermitean_basis(spin)).real


def from_coordinates(spin: SpinValue, coordinates: np.ndarray) -> np.ndarray:
    matrix = np.einsum("a,aij->ij", coordinates, hermitean_basis(spin))
    return 0.5 * (matrix + matrix.conj().T)


def axis_block(spin: SpinValue, axis: Axis) -> np.ndarray:
    """Rows of the map for one axis: entry (m, a) = <m,n| B_a |m,n>"""
    unitary = SpinCoreService.rotation_to_axis(spin, axis)
    return np.einsum("im,aij,jm->ma", unitary.conj(), hermitean_basis(spin), unitary).real


def project_to_states(matrix: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Clip negative eigenvalues and renormalize, only when positivity is violated beyond round-off"""
    eigenvalues, vectors = np.linalg.eigh(matrix)
    if eigenvalues[0] >= -settings.POSITIVITY_TOLERANCE:
        return matrix, False
    clipped = np.clip(eigenvalues, 0.0, None)
    clipped /= clipped.sum()
    return (vectors * clipped) @ vectors.conj().T, True


class ReconMixedService:
    @staticmethod
    def counting_bound(spin: SpinValue, axis_count: int) -> int:
        """Per-axis normalization leaves 2s numbers per axis plus the shared trace"""
        return min(spin.dimension() ** 2, spin.two_s * axis_count + 1)

    @staticmethod
    def multipole_bound(spin: SpinValue, axis_count: int) -> int:
        """
        Each axis samples one degree-l harmonic per multipole order l = 1..2s,
        and K samples fix at most min(K, 2l+1) of its coefficients
        """
        return 1 + sum(min(axis_count, 2 * l + 1) for l in range(1, spin.two_s + 1))

    @staticmethod
    def build_map(spin: SpinValue, quorum: QuorumSpec, verify: bool = True) -> MeasurementMap:
        matrix = np.vstack([axis_block(spin, axis) for axis in quorum.axes])
        singular_values = np.linalg.svd(matrix, compute_uv=False)
        threshold = settings.RANK_RELATIVE_THRESHOLD * singular_values[0]
        rank = int(np.sum(singular_values > threshold))

        traceless = np.linalg.svd(matrix[:, 1:], compute_uv=False) if matrix.shape[1] > 1 else np.array([])
        injective = rank == spin.dimension() ** 2 and (traceless.size == 0 or traceless[-1] > threshold)
        if not injective:
            condition_number = math.inf
        elif traceless.size == 0:
            condition_number = 1.0
        else:
            condition_number = float(traceless[0] / traceless[-1])

        measurement_map = MeasurementMap(
            spin=spin,
            quorum=quorum,
            matrix=matrix,
            singular_values=singular_values,
            rank=rank,
            condition_number=condition_number,
        )
        if verify:
            ReconMixedService.verify_map(measurement_map)
        return measurement_map

    @staticmethod
    def verify_map(measurement_map: MeasurementMap, seed: int = 0, tolerance: float = 1e-12):
        """The map applied to coordinates must reproduce measure_exact and act linearly on mixtures"""
        spin = measurement_map.spin
        first = SpinCoreService.random_density(spin, seed)
        second = SpinCoreService.random_density(spin, seed + 1)
        weight = 0.3
        mixture = DensityMatrix(spin=spin, matrix=weight * first.matrix + (1 - weight) * second.matrix)
        predicted = measurement_map.matrix @ to_coordinates(spin, mixture.matrix)
        direct = (
            weight * MeasurementService.measure_exact(first, measurement_map.quorum).stacked()
            + (1 - weight) * MeasurementService.measure_exact(second, measurement_map.quorum).stacked()
        )
        deviation = float(np.max(np.abs(predicted - direct)))
        if deviation > tolerance * max(1, spin.dimension()):
            raise InconsistentDataError(message=f"Measurement map failed the linearity check (deviation {deviation:.3e})")

    @staticmethod
    def certify_quorum(spin: SpinValue, quorum: QuorumSpec) -> QuorumCertificate:
        measurement_map = ReconMixedService.build_map(spin, quorum)
        count = len(quorum)
        minimal = 2 * spin.two_s + 1
        if measurement_map.injective:
            note = f"injective: {count} axes determine all {measurement_map.parameter_count} parameters"
        else:
            note = (
                f"rank-deficient: {measurement_map.deficit} parameter direction(s) unobservable; "
                f"any quorum needs at least 4s+1 = {minimal} axes"
            )
            if count == spin.two_s + 1:
                note += f"; the (2s+1)-axis count {count} does not suffice"
        logger.info(f"Certified spin {spin.label}, {count} axes: rank {measurement_map.rank}, deficit {measurement_map.deficit}")
        return QuorumCertificate(
            spin=spin.label,
            axis_count=count,
            parameters=measurement_map.parameter_count,
            rank=measurement_map.rank,
            deficit=measurement_map.deficit,
            injective=measurement_map.injective,
            condition_number=measurement_map.condition_number,
            counting_bound=ReconMixedService.counting_bound(spin, count),
            multipole_bound=ReconMixedService.multipole_bound(spin, count),
            minimal_injective_axes=minimal,
            note=note,
        )

    @staticmethod
    def solve(
        measurement_map: MeasurementMap,
        stacked: np.ndarray,
        mode: TableMode = TableMode.EXACT,
        allow_minimum_norm: bool = False,
    ) -> ReconResult:
        """Least-squares hermitean solution with the trace fixed to one"""
        spin = measurement_map.spin
        d = spin.dimension()
        matrix = measurement_map.matrix
        trace_coordinate = 1.0 / math.sqrt(d)
        target = stacked - matrix[:, 0] * trace_coordinate
        traceless = matrix[:, 1:]

        if measurement_map.injective:
            q, r = scipy.linalg.qr(traceless, mode="economic")
            solution = scipy.linalg.solve_triangular(r, q.T @ target)
        elif allow_minimum_norm:
            logger.warning(f"Map not injective (rank {measurement_map.rank}), returning minimum-norm solution")
            solution = scipy.linalg.lstsq(traceless, target, cond=settings.RANK_RELATIVE_THRESHOLD)[0]
        else:
            raise NotInjectiveError(measurement_map.rank, measurement_map.parameter_count)

        coordinates = np.concatenate([[trace_coordinate], solution])
        residual = float(np.linalg.norm(matrix @ coordinates - stacked))
        if mode == TableMode.EXACT and residual > settings.EXACT_RESIDUAL_TOLERANCE:
            raise InconsistentDataError(
                message=f"Exact table is inconsistent with any density matrix (residual {residual:.3e})",
                data={"residual": residual},
            )

        rho, projected = project_to_states(from_coordinates(spin, coordinates))
        if projected:
            logger.info(f"Linear estimate violated positivity, projected onto the state space (residual {residual:.3e})")
        return ReconResult(
            rho_hat=DensityMatrix(spin=spin, matrix=rho),
            residual=residual,
            injective=measurement_map.injective,
            rank=measurement_map.rank,
            condition_number=measurement_map.condition_number,
            projected=projected,
        )

    @staticmethod
    def reconstruct_mixed(
        table: IntensityTable,
        quorum: Optional[QuorumSpec] = None,
        allow_minimum_norm: bool = False,
    ) -> ReconResult:
        quorum = table.quorum if quorum is None else quorum
        if not quorum.matches(table.axes):
            raise ValidationError(message="Table axes do not match the quorum")
        measurement_map = ReconMixedService.build_map(table.spin, quorum, verify=False)
        return ReconMixedService.solve(measurement_map, table.stacked(), table.mode, allow_minimum_norm)

    @staticmethod
    def _cone_condition(spin: SpinValue, count: int, theta: float) -> float:
        quorum = MeasurementService.cone_axes(spin, count, theta)
        return ReconMixedService.build_map(spin, quorum, verify=False).condition_number

    @staticmethod
    def design_axes(
        spin: SpinValue,
        count: int,
        strategy: str = "cone-scan",
        seed: Optional[int] = None,
        grid_points: Optional[int] = None,
        candidates: Optional[int] = None,
        refine: Optional[bool] = None,
    ) -> DesignResult:
        """Best-conditioned injective axis set of the requested size"""
        if count < 1:
            raise ValidationError(message=f"Axis count must be at least 1, got {count}")
        if strategy == "cone-scan":
            return ReconMixedService._design_cone(
                spin,
                count,
                settings.CONE_SCAN_POINTS if grid_points is None else grid_points,
                settings.CONE_SCAN_REFINE if refine is None else refine,
            )
        if strategy == "random-frames":
            return ReconMixedService._design_random(
                spin,
                count,
                settings.SEED if seed is None else seed,
                settings.RANDOM_FRAME_CANDIDATES if candidates is None else candidates,
            )
        raise ValidationError(message=f"Unknown strategy '{strategy}', choose one of {', '.join(STRATEGIES)}")

    @staticmethod
    def _design_cone(spin: SpinValue, count: int, grid_points: int, refine: bool) -> DesignResult:
        step = (math.pi / 2) / grid_points
        grid = [step * (j + 1) for j in range(grid_points)]
        conditions = thread_pool_service.map_ordered(
            lambda theta: ReconMixedService._cone_condition(spin, count, theta), grid
        )
        injective = [(condition, theta) for theta, condition in zip(grid, conditions) if math.isfinite(condition)]
        if not injective:
            raise NoInjectiveConfigurationError(
                message=f"No injective cone of {count} axes for spin {spin.label} "
                        f"(rank bound {ReconMixedService.multipole_bound(spin, count)} < {spin.dimension() ** 2})",
                data={"candidates": len(grid)},
            )
        best_condition, best_theta = min(injective)

        if refine:
            index = grid.index(best_theta)
            lower = grid[index - 1] if index > 0 else step / 2
            upper = grid[index + 1] if index + 1 < len(grid) else math.pi / 2

            def objective(theta):
                condition = ReconMixedService._cone_condition(spin, count, theta)
                return condition if math.isfinite(condition) else 1e300

            result = minimize_scalar(objective, bounds=(lower, upper), method="bounded", options={"xatol": 1e-10})
            if result.success and result.fun < best_condition:
                logger.debug(f"Refined cone angle {best_theta:.6f} -> {result.x:.10f} (condition {result.fun:.6g})")
                best_condition, best_theta = float(result.fun), float(result.x)

        quorum = MeasurementService.cone_axes(spin, count, best_theta)
        logger.info(f"Cone-scan for spin {spin.label}, {count} axes: theta {best_theta:.6f}, condition {best_condition:.6g}")
        return DesignResult(
            spin=spin.label,
            strategy="cone-scan",
            axis_count=count,
            condition_number=best_condition,
            opening_angle=best_theta,
            candidates=len(grid),
            injective_candidates=len(injective),
            quorum=quorum,
        )

    @staticmethod
    def _design_random(spin: SpinValue, count: int, seed: int, candidates: int) -> DesignResult:
        rng = np.random.default_rng(seed)
        frames = []
        for _ in range(candidates):
            thetas = np.arccos(1.0 - 2.0 * rng.random(count))
            phis = 2.0 * math.pi * rng.random(count)
            frames.append(tuple(Axis(theta=float(t), phi=float(p)) for t, p in zip(thetas, phis)))

        def evaluate(axes):
            return ReconMixedService.build_map(spin, QuorumSpec.explicit(axes), verify=False).condition_number

        conditions = thread_pool_service.map_ordered(evaluate, frames)
        injective = [
            (condition, tuple((axis.theta, axis.phi) for axis in axes), axes)
            for axes, condition in zip(frames, conditions)
            if math.isfinite(condition)
        ]
        if not injective:
            raise NoInjectiveConfigurationError(
                message=f"None of {candidates} random frames of {count} axes is injective for spin {spin.label}",
                data={"candidates": candidates},
            )
        best_condition, _, best_axes = min(injective, key=lambda item: (item[0], item[1]))
        logger.info(f"Random-frames for spin {spin.label}, {count} axes: condition {best_condition:.6g}")
        return DesignResult(
            spin=spin.label,
            strategy="random-frames",
            axis_count=count,
            condition_number=best_condition,
            candidates=candidates,
            injective_candidates=len(injective),
            quorum=QuorumSpec(kind=QuorumKind.EXPLICIT, axes=best_axes),
        )


recon_mixed_service = ReconMixedService()
