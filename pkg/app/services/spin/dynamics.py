"""
Schroedinger evolution and its expectation-value representation.

The trajectory of a state is replaced by the trajectory of its quorum
probabilities. Closure is demonstrated as reconstruct, propagate one step,
measure, compared with the recorded next row.
"""
from __future__ import annotations

import logging
from typing import Optional, Sequence, Union

import numpy as np

from app.exceptions.spin_exceptions import DimensionMismatchError, NotInjectiveError, ValidationError
from app.schemas.dynamics import ClosureReport, ConservationReport, GeneratorReport, Hamiltonian, QuorumTrajectory
from app.schemas.measurement import Axis, IntensityTable, QuorumSpec, TableMode
from app.schemas.spin import DensityMatrix, PureState, SpinValue
from app.services.common.thread_pool import thread_pool_service
from app.services.spin.core import SpinCoreService
from app.services.spin.measurement import MeasurementService
from app.services.spin.recon_mixed import ReconMixedService
from app.services.spin.recon_pure import ReconPureService

logger = logging.getLogger(__name__)

StateLike = Union[PureState, DensityMatrix]


class Propagator:
    """exp(-iHt) from one eigendecomposition of H"""

    def __init__(self, hamiltonian: Hamiltonian):
        self.hamiltonian = hamiltonian
        self.energies, self.vectors = np.linalg.eigh(hamiltonian.matrix)

    def unitary(self, t: float) -> np.ndarray:
        return (self.vectors * np.exp(-1j * self.energies * t)) @ self.vectors.conj().T

    def apply(self, state: StateLike, t: float) -> StateLike:
        if state.spin.two_s != self.hamiltonian.spin.two_s:
            raise DimensionMismatchError(
                message=f"State spin {state.spin.label} differs from Hamiltonian spin {self.hamiltonian.spin.label}"
            )
        unitary = self.unitary(t)
        if isinstance(state, PureState):
            evolved = unitary @ state.amplitudes
            # renormalize round-off so the frozen state validates
            return PureState(spin=state.spin, amplitudes=evolved / np.linalg.norm(evolved))
        evolved = unitary @ state.matrix @ unitary.conj().T
        evolved = 0.5 * (evolved + evolved.conj().T)
        return DensityMatrix(spin=state.spin, matrix=evolved / np.trace(evolved).real)


class DynamicsService:
    @staticmethod
    def zeeman(spin: SpinValue, omega: float = 1.0, axis: Optional[Axis] = None) -> Hamiltonian:
        """omega * (n . S)"""
        axis = Axis.z() if axis is None else axis
        matrix = omega * SpinCoreService.spin_operators(spin).along(axis.vector)
        return Hamiltonian(spin=spin, matrix=matrix, label=f"zeeman(omega={omega:g})")

    @staticmethod
    def quadratic(spin: SpinValue, omega: float = 1.0, axis: Optional[Axis] = None, kappa: float = 0.0) -> Hamiltonian:
        """omega * (n . S) + kappa * Sz^2"""
        axis = Axis.z() if axis is None else axis
        ops = SpinCoreService.spin_operators(spin)
        matrix = omega * ops.along(axis.vector) + kappa * (ops.sz @ ops.sz)
        return Hamiltonian(spin=spin, matrix=matrix, label=f"quadratic(omega={omega:g},kappa={kappa:g})")

    @staticmethod
    def hamiltonian(spin: SpinValue, matrix, label: str = "custom") -> Hamiltonian:
        return Hamiltonian(spin=spin, matrix=matrix, label=label)

    @staticmethod
    def evolve(state: StateLike, hamiltonian: Hamiltonian, t: float) -> StateLike:
        return Propagator(hamiltonian).apply(state, t)

    @staticmethod
    def quorum_trajectory(
        state0: StateLike, hamiltonian: Hamiltonian, times: Sequence[float], quorum: QuorumSpec
    ) -> QuorumTrajectory:
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
            raise ValidationError(message="Time grid must be a non-empty strictly increasing sequence")
        propagator = Propagator(hamiltonian)

        def measure(t):
            evolved = propagator.apply(state0, t)
            return MeasurementService.measure_exact(evolved, quorum).probabilities

        values = thread_pool_service.map_ordered(measure, times.tolist())
        return QuorumTrajectory(spin=state0.spin, quorum=quorum, times=times, values=np.array(values))

    @staticmethod
    def time_grid(t0: float, t1: float, steps: int) -> np.ndarray:
        """steps + 1 equally spaced times from t0 to t1"""
        if steps < 1 or not t1 > t0:
            raise ValidationError(message=f"Need t1 > t0 and at least one step, got [{t0}, {t1}] with {steps} steps")
        return np.linspace(t0, t1, steps + 1)

    @staticmethod
    def closure_check(trajectory: QuorumTrajectory, hamiltonian: Hamiltonian, pure: bool = False) -> ClosureReport:
        """
        Reconstruct the state at every grid time from the quorum row alone, propagate it to the
        next grid time and compare the predicted quorum row with the recorded one.
        """
        spin = trajectory.spin
        quorum = trajectory.quorum
        propagator = Propagator(hamiltonian)
        measurement_map = None
        if not pure:
            measurement_map = ReconMixedService.build_map(spin, quorum, verify=False)
            if not measurement_map.injective:
                raise NotInjectiveError(measurement_map.rank, measurement_map.parameter_count)

        def step(index: int) -> float:
            recorded = trajectory.values[index]
            if pure:
                table = IntensityTable(spin=spin, axes=quorum.axes, probabilities=recorded)
                state = ReconPureService.reconstruct_pure(table).state
            else:
                state = ReconMixedService.solve(measurement_map, recorded.reshape(-1), TableMode.EXACT).rho_hat
            dt = trajectory.times[index + 1] - trajectory.times[index]
            predicted = MeasurementService.measure_exact(propagator.apply(state, dt), quorum).probabilities
            return float(np.max(np.abs(predicted - trajectory.values[index + 1])))

        deviations = thread_pool_service.map_ordered(step, range(trajectory.times.size - 1))
        max_deviation = max(deviations) if deviations else 0.0
        logger.info(f"Closure over {len(deviations)} steps for spin {spin.label}: max deviation {max_deviation:.3e}")
        return ClosureReport(
            spin=spin.label,
            hamiltonian=hamiltonian.label,
            steps=len(deviations),
            max_deviation=max_deviation,
            deviations=deviations,
            mode="pure" if pure else "mixed",
        )

    @staticmethod
    def generator_probe(state: StateLike, hamiltonian: Hamiltonian, quorum: QuorumSpec, dt: float) -> GeneratorReport:
        """
        Rates d<P>/dt of the quorum projectors P = |m,n><m,n| two ways: central finite
        difference of the trajectory, and Tr(rho i[H, P])
        """
        if dt <= 0:
            raise ValidationError(message=f"dt must be positive, got {dt}")
        spin = state.spin
        rho = SpinCoreService.as_density(state).matrix
        propagator = Propagator(hamiltonian)
        forward = MeasurementService.measure_exact(propagator.apply(state, dt), quorum).probabilities
        backward = MeasurementService.measure_exact(propagator.apply(state, -dt), quorum).probabilities
        finite_difference = (forward - backward) / (2.0 * dt)

        h = hamiltonian.matrix
        # Tr(rho i[H, P]) with P = u u^dagger is i(u^dagger rho H u - u^dagger H rho u)
        commutator = np.empty_like(finite_difference)
        for k, axis in enumerate(quorum.axes):
            unitary = SpinCoreService.rotation_to_axis(spin, axis)
            left = np.einsum("im,ij,jm->m", unitary.conj(), rho @ h, unitary)
            right = np.einsum("im,ij,jm->m", unitary.conj(), h @ rho, unitary)
            commutator[k] = (1j * (left - right)).real

        max_gap = float(np.max(np.abs(finite_difference - commutator)))
        logger.debug(f"Generator probe dt={dt:g}: max gap {max_gap:.3e}")
        return GeneratorReport(
            spin=spin.label,
            hamiltonian=hamiltonian.label,
            dt=dt,
            max_gap=max_gap,
            finite_difference=finite_difference.tolist(),
            commutator=commutator.tolist(),
        )

    @staticmethod
    def conservation_check(state: StateLike, hamiltonian: Hamiltonian, times: Sequence[float]) -> ConservationReport:
        """Largest drift of norm, trace, purity and energy along the grid"""
        propagator = Propagator(hamiltonian)
        rho0 = SpinCoreService.as_density(state)
        purity0 = SpinCoreService.purity(rho0)
        energy0 = SpinCoreService.expectation(rho0, hamiltonian.matrix).real

        norm_drift = trace_drift = purity_drift = energy_drift = 0.0
        for t in times:
            evolved = propagator.apply(state, t)
            if isinstance(evolved, PureState):
                raw = propagator.unitary(t) @ state.amplitudes
                norm_drift = max(norm_drift, abs(float(np.linalg.norm(raw)) - 1.0))
            unitary = propagator.unitary(t)
            raw_rho = unitary @ rho0.matrix @ unitary.conj().T
            trace_drift = max(trace_drift, abs(complex(np.trace(raw_rho)) - 1.0))
            purity_drift = max(purity_drift, abs(float(np.einsum("ij,ji->", raw_rho, raw_rho).real) - purity0))
            energy = complex(np.einsum("ij,ji->", raw_rho, hamiltonian.matrix)).real
            energy_drift = max(energy_drift, abs(energy - energy0))
        return ConservationReport(
            norm_drift=norm_drift,
            trace_drift=trace_drift,
            purity_drift=purity_drift,
            energy_drift=energy_drift,
            horizon=float(max(times)) if len(times) else None,
        )

    @staticmethod
    def larmor_probability(state: StateLike, omega: float, t: float) -> float:
        """p_+ along x for spin 1/2 under omega Sz: 1/2 + <Sx>_0 cos(wt) - <Sy>_0 sin(wt)"""
        if state.spin.two_s != 1:
            raise DimensionMismatchError(message="Larmor closed form holds for spin 1/2 only")
        ops = SpinCoreService.spin_operators(state.spin)
        sx = SpinCoreService.expectation(state, ops.sx).real
        sy = SpinCoreService.expectation(state, ops.sy).real
        return float(0.5 + sx * np.cos(omega * t) - sy * np.sin(omega * t))


dynamics_service = DynamicsService()
