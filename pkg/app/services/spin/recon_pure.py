"""
Pure-state reconstruction from three Stern-Gerlach axes.

Two routes are offered. The nearby-axis route keeps the moduli of the
z amplitudes and the first-order response to a small tilt of the axis,
which fixes every phase difference up to its sign and so leaves 2^(2s)
partner candidates; a third, perpendicular axis picks one of them. The
tripod route fits the 2s free phases directly to two finite-angle axes.
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares, minimize

from app.core.config import settings
from app.exceptions.spin_exceptions import (
    AmbiguousError,
    DimensionMismatchError,
    NoConvergenceError,
    NoMatchError,
    ValidationError,
    ZeroAmplitudeError,
)
from app.schemas.measurement import Axis, IntensityTable, QuorumSpec, TableMode
from app.schemas.reconstruction import (
    NumberAudit,
    PartnerSet,
    PhasePolynomial,
    PhaseVector,
    PureReconResult,
    UniquenessReport,
)
from app.schemas.spin import PureState, SpinValue
from app.services.common.thread_pool import thread_pool_service
from app.services.spin.core import SpinCoreService
from app.services.spin.measurement import MeasurementService, axis_probabilities

logger = logging.getLogger(__name__)


def sign_pattern(index: int, length: int) -> Tuple[int, ...]:
    """Bit j of index set means the j-th phase difference is flipped; index 0 is the identity pattern"""
    return tuple(-1 if (index >> j) & 1 else 1 for j in range(length))


def apply_pattern(moduli: np.ndarray, differences: np.ndarray, signs: Sequence[int]) -> np.ndarray:
    """Amplitudes r_m e^{i chi_m} with chi_0 = 0 and chi_{j+1} = chi_j + sign_j * delta_j"""
    chi = np.concatenate([[0.0], np.cumsum(np.asarray(signs) * differences)])
    return moduli * np.exp(1j * chi)


def zero_amplitude_labels(spin: SpinValue, moduli: np.ndarray, tolerance: float) -> List[str]:
    return [spin.m_label(j) for j in np.flatnonzero(moduli <= tolerance)]


class ReconPureService:
    @staticmethod
    def partners_nearby_axes(psi: PureState) -> PartnerSet:
        spin = psi.spin
        moduli = np.abs(psi.amplitudes)
        zeros = zero_amplitude_labels(spin, moduli, settings.ZERO_AMPLITUDE_TOLERANCE)
        if zeros:
            raise ZeroAmplitudeError(zeros)

        differences = PhaseVector.of(psi).differences()
        length = spin.two_s
        candidates: List[PureState] = []
        signs: List[Tuple[int, ...]] = []
        for index in range(2 ** length):
            pattern = sign_pattern(index, length)
            candidate = PureState.from_vector(spin, apply_pattern(moduli, differences, pattern))
            duplicate = any(
                SpinCoreService.fidelity(candidate, kept) > 1.0 - settings.PARTNER_DEDUP_TOLERANCE for kept in candidates
            )
            if not duplicate:
                candidates.append(candidate)
                signs.append(pattern)
        logger.debug(f"Spin {spin.label}: {len(candidates)} distinct nearby-axis partners of {2 ** length} patterns")
        return PartnerSet(candidates=tuple(candidates), signs=tuple(signs))

    @staticmethod
    def nearby_axis_response(psi: PureState, epsilon: float = 1e-6) -> np.ndarray:
        """Central difference of the outcome probabilities for an axis tilted by +-epsilon from z in the xz-plane"""
        forward = MeasurementService.sg_probabilities(psi, Axis(theta=epsilon, phi=0.0))
        backward = MeasurementService.sg_probabilities(psi, Axis(theta=epsilon, phi=math.pi))
        return (forward - backward) / (2.0 * epsilon)

    @staticmethod
    def select_partner(partners: PartnerSet, table: IntensityTable, tolerance: Optional[float] = None) -> PartnerSet:
        """Mark the unique candidate reproducing the table's intensities"""
        if len(partners) == 0:
            raise ValidationError(message="Partner set is empty")
        spin = partners.candidates[0].spin
        if table.spin.two_s != spin.two_s:
            raise DimensionMismatchError(message=f"Table spin {table.spin.label} differs from partner spin {spin.label}")
        if tolerance is None:
            if table.mode == TableMode.EXACT:
                tolerance = settings.THIRD_AXIS_TOLERANCE
            else:
                # four binomial standard errors at p = 1/2
                tolerance = settings.CONSISTENCY_Z_THRESHOLD * 0.5 / math.sqrt(table.shots)

        deviations = []
        for candidate in partners.candidates:
            predicted = np.array([MeasurementService.sg_probabilities(candidate, axis) for axis in table.axes])
            deviations.append(float(np.max(np.abs(predicted - table.probabilities))))
        matches = [index for index, deviation in enumerate(deviations) if deviation <= tolerance]
        logger.debug(f"Third-axis deviations {['%.2e' % value for value in deviations]}, {len(matches)} within {tolerance:.1e}")

        if not matches:
            raise NoMatchError(data={"best_deviation": min(deviations)})
        if len(matches) > 1:
            raise AmbiguousError(len(matches))
        return PartnerSet(candidates=partners.candidates, signs=partners.signs, selected=matches[0])

    @staticmethod
    def select_by_third_axis(partners: PartnerSet, table: IntensityTable, tolerance: Optional[float] = None) -> PureState:
        selected = ReconPureService.select_partner(partners, table, tolerance)
        return selected.candidates[selected.selected]

    @staticmethod
    def _phase_residuals(chi_free, moduli, transfers, targets):
        amplitudes = moduli * np.exp(1j * np.concatenate([[0.0], chi_free]))
        residuals = []
        for transfer, target in zip(transfers, targets):
            residuals.append(np.abs(transfer @ amplitudes) ** 2 - target)
        return np.concatenate(residuals)

    @staticmethod
    def _phase_jacobian(chi_free, moduli, transfers, targets):
        amplitudes = moduli * np.exp(1j * np.concatenate([[0.0], chi_free]))
        blocks = []
        for transfer in transfers:
            rotated = transfer @ amplitudes
            # d|w_i|^2 / d chi_j = -2 Im(conj(w_i) V_ij b_j)
            blocks.append(-2.0 * np.imag(rotated.conj()[:, None] * transfer * amplitudes[None, :])[:, 1:])
        return np.vstack(blocks)

    @staticmethod
    def _refine(start, moduli, transfers, targets) -> Tuple[float, np.ndarray]:
        result = least_squares(
            ReconPureService._phase_residuals,
            start,
            jac=ReconPureService._phase_jacobian,
            args=(moduli, transfers, targets),
            method="trf",
            ftol=1e-15,
            xtol=1e-15,
            gtol=settings.PURE_GRADIENT_TOLERANCE,
            max_nfev=settings.PURE_MAX_ITERATIONS,
        )
        return float(np.linalg.norm(result.fun)), result.x

    @staticmethod
    def reconstruct_pure(table: IntensityTable, seed: int = 0) -> PureReconResult:
        """
        Fit a pure state to the intensities of three non-coplanar axes.

        Axis 1 plays the role of z: it gives the moduli. The 2s phases are fitted to
        axes 2 and 3 from the zero-phase start, then from every sign-flip variant of
        that first solution, then from random phases.
        """
        spin = table.spin
        if len(table.axes) != 3:
            raise ValidationError(message=f"Pure reconstruction needs a three-axis table, got {len(table.axes)} axes")
        MeasurementService.tripod_axes(*table.axes)

        p_first = table.probabilities[0]
        zeros = zero_amplitude_labels(spin, p_first, settings.ZERO_AMPLITUDE_TOLERANCE ** 2)
        if zeros:
            raise ZeroAmplitudeError(zeros)
        moduli = np.sqrt(p_first / p_first.sum())

        frames = [SpinCoreService.rotation_to_axis(spin, axis) for axis in table.axes]
        transfers = [frames[k].conj().T @ frames[0] for k in (1, 2)]
        targets = [table.probabilities[1], table.probabilities[2]]
        tolerance = settings.PURE_RESIDUAL_TOLERANCE if table.mode == TableMode.EXACT else math.inf
        free = spin.two_s

        seeds_tried = 1
        best_residual, best_chi = ReconPureService._refine(np.zeros(free), moduli, transfers, targets)
        best_index = 0

        if best_residual > tolerance and free > 0:
            differences = np.diff(np.concatenate([[0.0], best_chi]))
            patterns = list(range(1, 2 ** free))
            batch = max(1, settings.PURE_SEED_BATCH)
            for begin in range(0, len(patterns), batch):
                chunk = patterns[begin:begin + batch]
                starts = [
                    np.cumsum(np.asarray(sign_pattern(index, free)) * differences) for index in chunk
                ]
                outcomes = thread_pool_service.map_ordered(
                    lambda start: ReconPureService._refine(start, moduli, transfers, targets), starts
                )
                seeds_tried += len(chunk)
                residual, index, chi = min(
                    ((residual, index, chi) for index, (residual, chi) in zip(chunk, outcomes)),
                    key=lambda item: (item[0], item[1]),
                )
                if residual < best_residual:
                    best_residual, best_index, best_chi = residual, index, chi
                if best_residual <= tolerance:
                    break

        if best_residual > tolerance and free > 0:
            rng = np.random.default_rng(seed)
            starts = [rng.uniform(-math.pi, math.pi, free) for _ in range(settings.PURE_RANDOM_RESTARTS)]
            outcomes = thread_pool_service.map_ordered(
                lambda start: ReconPureService._refine(start, moduli, transfers, targets), starts
            )
            seeds_tried += len(starts)
            for offset, (residual, chi) in enumerate(outcomes):
                if residual < best_residual:
                    best_residual, best_index, best_chi = residual, 2 ** free + offset, chi

        if best_residual > tolerance:
            raise NoConvergenceError(best_residual, seeds_tried)

        amplitudes = frames[0] @ (moduli * np.exp(1j * np.concatenate([[0.0], best_chi])))
        state = PureState.from_vector(spin, amplitudes).gauge_normal(settings.ZERO_AMPLITUDE_TOLERANCE)
        logger.info(f"Pure reconstruction for spin {spin.label}: residual {best_residual:.3e} after {seeds_tried} seeds")
        return PureReconResult(state=state, residual=best_residual, seeds_tried=seeds_tried, pattern_index=best_index)

    @staticmethod
    def verify_same_intensities(
        psi: PureState, psi_tilde: PureState, quorum: QuorumSpec, tolerance: Optional[float] = None
    ) -> bool:
        tolerance = settings.SAME_INTENSITY_TOLERANCE if tolerance is None else tolerance
        if psi.spin.two_s != psi_tilde.spin.two_s:
            raise DimensionMismatchError(message=f"Spins {psi.spin.label} and {psi_tilde.spin.label} differ")
        for axis in quorum.axes:
            unitary = SpinCoreService.rotation_to_axis(psi.spin, axis)
            gap = np.max(np.abs(axis_probabilities(psi, unitary) - axis_probabilities(psi_tilde, unitary)))
            if gap > tolerance:
                return False
        return True

    @staticmethod
    def measured_number_audit(spin: SpinValue) -> NumberAudit:
        """Independent real numbers the three-axis method consumes"""
        axes = 3
        values_per_axis = spin.dimension()
        measured = axes * values_per_axis - axes
        expected = 3 * spin.two_s
        if measured != expected:
            raise ValidationError(message=f"Three-axis method consumes {measured} numbers, expected {expected}")
        return NumberAudit(
            spin=spin.label,
            axes=axes,
            values_per_axis=values_per_axis,
            normalizations=axes,
            measured_numbers=measured,
            expected=expected,
            pure_parameters=2 * spin.two_s,
        )

    # uniqueness probe: e^{i f(n1.S)} psi = e^{i g(n2.S)} psi = e^{i h(n3.S)} psi

    @staticmethod
    def _probe_frames(spin: SpinValue, frame: Optional[Sequence[Axis]]) -> List[np.ndarray]:
        frame = (Axis.x(), Axis.y(), Axis.z()) if frame is None else tuple(frame)
        if len(frame) != 3:
            raise ValidationError(message="Uniqueness probe needs three axes")
        return [SpinCoreService.rotation_to_axis(spin, axis) for axis in frame]

    @staticmethod
    def _defect_parts(phases: np.ndarray, psi: np.ndarray, frames: List[np.ndarray]):
        d = psi.shape[0]
        rotated = []
        coefficient_sets = []
        for k, frame in enumerate(frames):
            coefficients = np.exp(1j * phases[k * d:(k + 1) * d]) * (frame.conj().T @ psi)
            coefficient_sets.append(coefficients)
            rotated.append(frame @ coefficients)
        x_vec, y_vec, z_vec = rotated
        defect = float(np.linalg.norm(z_vec - y_vec) ** 2 + np.linalg.norm(z_vec - x_vec) ** 2)
        return defect, rotated, coefficient_sets

    @staticmethod
    def _probe_objective(phases: np.ndarray, psi: np.ndarray, frames: List[np.ndarray]):
        """D / nu and its gradient; phases hold the values of f, g, h on the spectra of the three components"""
        d = psi.shape[0]
        defect, rotated, coefficient_sets = ReconPureService._defect_parts(phases, psi, frames)
        x_vec, y_vec, z_vec = rotated
        fx, fy, fz = frames
        cx, cy, cz = coefficient_sets

        grad_defect = np.concatenate([
            2.0 * np.imag(np.conj(fx.conj().T @ z_vec) * cx),
            2.0 * np.imag(np.conj(fy.conj().T @ z_vec) * cy),
            -2.0 * np.imag(np.conj(cz) * (fz.conj().T @ (x_vec + y_vec))),
        ])

        spread = 0.0
        grad_spread = np.empty_like(phases)
        for k in range(3):
            values = np.exp(1j * phases[k * d:(k + 1) * d])
            mean = values.mean()
            spread += 1.0 - abs(mean) ** 2
            grad_spread[k * d:(k + 1) * d] = 2.0 * np.imag(np.conj(mean) * values) / d

        if spread <= 1e-300:
            return 1e300, np.zeros_like(phases)
        ratio = defect / spread
        return ratio, (grad_defect - ratio * grad_spread) / spread

    @staticmethod
    def defect(
        psi: PureState,
        f: PhasePolynomial,
        g: PhasePolynomial,
        h: PhasePolynomial,
        frame: Optional[Sequence[Axis]] = None,
    ) -> float:
        """||e^{ih(n3.S)}psi - e^{ig(n2.S)}psi||^2 + ||e^{ih(n3.S)}psi - e^{if(n1.S)}psi||^2"""
        frames = ReconPureService._probe_frames(psi.spin, frame)
        m = psi.spin.m_values()
        phases = np.concatenate([f(m), g(m), h(m)])
        return ReconPureService._defect_parts(phases, psi.amplitudes, frames)[0]

    @staticmethod
    def uniqueness_probe(
        psi: PureState,
        trials: int = 200,
        seed: Optional[int] = None,
        frame: Optional[Sequence[Axis]] = None,
    ) -> UniquenessReport:
        """
        Search for non-constant phase polynomials leaving psi's three intensity sets unchanged.

        The best gauge-projected defect over all random starts is reported; a value
        bounded away from zero supports uniqueness for this state.
        """
        if trials < 1:
            raise ValidationError(message=f"trials must be at least 1, got {trials}")
        spin = psi.spin
        d = spin.dimension()
        frames = ReconPureService._probe_frames(spin, frame)
        rng = np.random.default_rng(settings.SEED if seed is None else seed)
        starts = [rng.uniform(-math.pi, math.pi, 3 * d) for _ in range(trials)]

        def run(start):
            result = minimize(
                ReconPureService._probe_objective,
                start,
                args=(psi.amplitudes, frames),
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": 500, "gtol": 1e-14, "ftol": 1e-16},
            )
            return float(result.fun), result.x

        outcomes = thread_pool_service.map_ordered(run, starts)
        best_ratio, best_phases = min(outcomes, key=lambda item: item[0])
        best_defect = ReconPureService._defect_parts(best_phases, psi.amplitudes, frames)[0]
        spread = float(sum(
            1.0 - abs(np.exp(1j * best_phases[k * d:(k + 1) * d]).mean()) ** 2 for k in range(3)
        ))

        m = spin.m_values()
        degree = spin.two_s
        polynomials = [
            np.polynomial.polynomial.polyfit(m, np.unwrap(best_phases[k * d:(k + 1) * d]), degree) if d > 1
            else best_phases[k * d:(k + 1) * d]
            for k in range(3)
        ]
        logger.info(f"Uniqueness probe for spin {spin.label}: best ratio {best_ratio:.3e} over {trials} trials")
        return UniquenessReport(
            spin=spin.label,
            trials=trials,
            best_ratio=best_ratio,
            best_defect=best_defect,
            nonconstancy=spread,
            f=[float(value) for value in polynomials[0]],
            g=[float(value) for value in polynomials[1]],
            h=[float(value) for value in polynomials[2]],
        )


recon_pure_service = ReconPureService()
