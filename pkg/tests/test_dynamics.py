import math

import numpy as np
import pytest

from app.exceptions.spin_exceptions import DimensionMismatchError, NotInjectiveError, ValidationError
from app.schemas.measurement import Axis, QuorumSpec
from app.schemas.spin import PureState, SpinValue
from app.services.spin.core import SpinCoreService
from app.services.spin.dynamics import DynamicsService, Propagator
from app.services.spin.measurement import MeasurementService


def test_propagator_is_unitary(spin_three_halves, tilted_axis):
    hamiltonian = DynamicsService.quadratic(spin_three_halves, 1.0, tilted_axis, kappa=0.3)
    unitary = Propagator(hamiltonian).unitary(2.5)
    np.testing.assert_allclose(unitary.conj().T @ unitary, np.eye(4), atol=1e-13)
    np.testing.assert_allclose(Propagator(hamiltonian).unitary(0.0), np.eye(4), atol=1e-14)


def test_zeeman_matrix(spin_half):
    hamiltonian = DynamicsService.zeeman(spin_half, 2.0, Axis.x())
    np.testing.assert_allclose(hamiltonian.matrix, [[0, 1], [1, 0]], atol=1e-15)


def test_hamiltonian_must_be_hermitean(spin_half):
    with pytest.raises(ValidationError):
        DynamicsService.hamiltonian(spin_half, [[0, 1], [0, 0]])


def test_larmor_precession(spin_half):
    plus_x = PureState.from_vector(spin_half, [1.0, 1.0])
    omega = 1.3
    hamiltonian = DynamicsService.zeeman(spin_half, omega)
    times = DynamicsService.time_grid(0.0, 10.0, 50)
    trajectory = DynamicsService.quorum_trajectory(plus_x, hamiltonian, times, QuorumSpec.explicit([Axis.x()]))
    expected = [DynamicsService.larmor_probability(plus_x, omega, t) for t in times]
    np.testing.assert_allclose(trajectory.values[:, 0, 0], expected, atol=1e-12)
    np.testing.assert_allclose(expected, 0.5 + 0.5 * np.cos(omega * times), atol=1e-14)


def test_larmor_closed_form_is_spin_half_only(spin_one, generic_state):
    with pytest.raises(DimensionMismatchError):
        DynamicsService.larmor_probability(generic_state(spin_one), 1.0, 0.5)


def test_time_grid():
    times = DynamicsService.time_grid(0.0, 10.0, 200)
    assert times.size == 201
    assert times[-1] == 10.0
    with pytest.raises(ValidationError):
        DynamicsService.time_grid(1.0, 1.0, 10)
    with pytest.raises(ValidationError):
        DynamicsService.time_grid(0.0, 1.0, 0)


def test_trajectory_frame(spin_one, random_density, tilted_axis):
    quorum = MeasurementService.cone_axes(spin_one, 5, 1.0)
    times = DynamicsService.time_grid(0.0, 1.0, 4)
    trajectory = DynamicsService.quorum_trajectory(
        random_density(spin_one), DynamicsService.zeeman(spin_one, 1.0, tilted_axis), times, quorum
    )
    frame = trajectory.to_frame()
    assert list(frame.columns) == ["t", "k", "m", "p"]
    assert len(frame) == 5 * 5 * 3
    assert frame.groupby(["t", "k"])["p"].sum().to_numpy() == pytest.approx(1.0)


@pytest.mark.parametrize("two_s", [1, 2])
def test_mixed_closure(two_s, random_density, tilted_axis):
    spin = SpinValue(two_s=two_s)
    quorum = MeasurementService.cone_axes(spin, 2 * two_s + 1, 1.0)
    times = DynamicsService.time_grid(0.0, 10.0, 40)
    for hamiltonian in (
        DynamicsService.zeeman(spin, 1.0, tilted_axis),
        DynamicsService.quadratic(spin, 1.0, Axis.z(), kappa=0.3),
    ):
        trajectory = DynamicsService.quorum_trajectory(random_density(spin), hamiltonian, times, quorum)
        report = DynamicsService.closure_check(trajectory, hamiltonian)
        assert report.steps == 40
        assert report.max_deviation <= 1e-8


def test_pure_closure_on_the_tripod(spin_half, tilted_axis):
    psi = SpinCoreService.random_pure(spin_half, 3)
    hamiltonian = DynamicsService.zeeman(spin_half, 1.0, tilted_axis)
    times = DynamicsService.time_grid(0.0, 5.0, 10)
    trajectory = DynamicsService.quorum_trajectory(psi, hamiltonian, times, MeasurementService.tripod_axes())
    report = DynamicsService.closure_check(trajectory, hamiltonian, pure=True)
    assert report.mode == "pure"
    assert report.max_deviation <= 1e-8


@pytest.mark.parametrize("two_s", [2, 3])
def test_pure_closure_for_higher_spin(two_s, generic_state):
    spin = SpinValue(two_s=two_s)
    psi = generic_state(spin, seed=5)
    hamiltonian = DynamicsService.quadratic(spin, 1.0, Axis.z(), kappa=0.4)
    times = DynamicsService.time_grid(0.0, 4.0, 40)
    trajectory = DynamicsService.quorum_trajectory(psi, hamiltonian, times, MeasurementService.tripod_axes())
    report = DynamicsService.closure_check(trajectory, hamiltonian, pure=True)
    assert report.steps == 40
    assert report.max_deviation <= 1e-8


def test_closure_needs_an_injective_quorum(spin_one, random_density):
    quorum = MeasurementService.cone_axes(spin_one, 4, 1.0)
    hamiltonian = DynamicsService.zeeman(spin_one)
    trajectory = DynamicsService.quorum_trajectory(random_density(spin_one), hamiltonian, [0.0, 0.1], quorum)
    with pytest.raises(NotInjectiveError):
        DynamicsService.closure_check(trajectory, hamiltonian)


@pytest.mark.parametrize("two_s", [1, 2])
def test_conservation(two_s, random_density, tilted_axis):
    spin = SpinValue(two_s=two_s)
    hamiltonian = DynamicsService.quadratic(spin, 1.0, tilted_axis, kappa=0.3)
    times = DynamicsService.time_grid(0.0, 10.0, 100)
    for state in (random_density(spin), SpinCoreService.random_pure(spin, 4)):
        report = DynamicsService.conservation_check(state, hamiltonian, times)
        assert max(report.norm_drift, report.trace_drift, report.purity_drift, report.energy_drift) <= 1e-12
        assert report.horizon == 10.0


def test_generator_probe_converges_quadratically(spin_one, tilted_axis):
    psi = SpinCoreService.random_pure(spin_one, 12)
    hamiltonian = DynamicsService.zeeman(spin_one, 1.0, tilted_axis)
    quorum = MeasurementService.cone_axes(spin_one, 5, 1.0)
    coarse = DynamicsService.generator_probe(psi, hamiltonian, quorum, 1e-2)
    fine = DynamicsService.generator_probe(psi, hamiltonian, quorum, 5e-3)
    assert coarse.max_gap < 1e-3
    assert 3.5 <= coarse.max_gap / fine.max_gap <= 4.5


def test_generator_probe_rejects_bad_step(spin_half):
    with pytest.raises(ValidationError):
        DynamicsService.generator_probe(
            PureState.basis(spin_half, 0), DynamicsService.zeeman(spin_half), MeasurementService.tripod_axes(), 0.0
        )


def test_evolution_keeps_pure_states_pure(spin_one, generic_state):
    psi = generic_state(spin_one)
    evolved = DynamicsService.evolve(psi, DynamicsService.zeeman(spin_one, 0.7, Axis.y()), math.pi)
    assert isinstance(evolved, PureState)
    assert np.linalg.norm(evolved.amplitudes) == pytest.approx(1.0, abs=1e-14)
