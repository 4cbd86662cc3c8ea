import math

import numpy as np
import pytest

from app.exceptions.spin_exceptions import (
    InconsistentDataError,
    NoInjectiveConfigurationError,
    NotInjectiveError,
    ValidationError,
)
from app.schemas.measurement import Axis, IntensityTable, QuorumSpec
from app.schemas.spin import SpinValue
from app.services.spin.core import SpinCoreService
from app.services.spin.measurement import MeasurementService
from app.services.spin.recon_mixed import (
    ReconMixedService,
    from_coordinates,
    hermitean_basis,
    project_to_states,
    to_coordinates,
)


@pytest.mark.parametrize("two_s", [1, 2, 3])
def test_hermitean_basis_is_orthonormal(two_s):
    spin = SpinValue(two_s=two_s)
    basis = hermitean_basis(spin)
    d = spin.dimension()
    assert basis.shape == (d * d, d, d)
    gram = np.einsum("aij,bji->ab", basis, basis)
    np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-14)
    for element in basis:
        np.testing.assert_allclose(element, element.conj().T)


def test_coordinates_round_trip(spin_three_halves, random_density):
    rho = random_density(spin_three_halves)
    coordinates = to_coordinates(spin_three_halves, rho.matrix)
    assert coordinates[0] == pytest.approx(1.0 / math.sqrt(4))
    np.testing.assert_allclose(from_coordinates(spin_three_halves, coordinates), rho.matrix, atol=1e-14)


@pytest.mark.parametrize(
    "two_s, count, bound",
    [(1, 2, 3), (1, 3, 4), (2, 3, 7), (2, 4, 8), (2, 5, 9), (3, 7, 16), (4, 9, 25)],
)
def test_multipole_bound(two_s, count, bound):
    assert ReconMixedService.multipole_bound(SpinValue(two_s=two_s), count) == bound


def test_counting_bound(spin_one):
    assert ReconMixedService.counting_bound(spin_one, 3) == 7
    assert ReconMixedService.counting_bound(spin_one, 4) == 9


@pytest.mark.parametrize("two_s, count, deficit", [(1, 2, 1), (1, 3, 0), (2, 3, 2), (2, 4, 1), (2, 5, 0)])
def test_cone_rank_reaches_the_multipole_bound(two_s, count, deficit):
    spin = SpinValue(two_s=two_s)
    certificate = ReconMixedService.certify_quorum(spin, MeasurementService.cone_axes(spin, count, 1.0))
    assert certificate.deficit == deficit
    assert certificate.rank == certificate.multipole_bound
    assert certificate.injective == (deficit == 0)
    assert certificate.minimal_injective_axes == 2 * two_s + 1


def test_certificate_of_non_injective_quorum(spin_one):
    certificate = ReconMixedService.certify_quorum(spin_one, MeasurementService.cone_axes(spin_one, 4, 1.0))
    assert math.isinf(certificate.condition_number)
    assert certificate.counting_bound == 9
    assert "4s+1 = 5" in certificate.note


def test_tripod_is_injective_for_spin_half(spin_half):
    certificate = ReconMixedService.certify_quorum(spin_half, MeasurementService.tripod_axes())
    assert certificate.injective
    assert certificate.condition_number < 10


@pytest.mark.parametrize("two_s", [1, 2, 3])
def test_mixed_round_trip(two_s, random_density):
    spin = SpinValue(two_s=two_s)
    quorum = MeasurementService.cone_axes(spin, 2 * two_s + 1, 1.0)
    rho = random_density(spin, seed=10 + two_s)
    result = ReconMixedService.reconstruct_mixed(MeasurementService.measure_exact(rho, quorum))
    assert np.linalg.norm(result.rho_hat.matrix - rho.matrix) <= 1e-8
    assert result.injective
    assert not result.projected
    assert result.residual <= 1e-10


def test_rank_deficient_map_raises(spin_one, random_density):
    quorum = MeasurementService.cone_axes(spin_one, 4, 1.0)
    table = MeasurementService.measure_exact(random_density(spin_one), quorum)
    with pytest.raises(NotInjectiveError) as info:
        ReconMixedService.reconstruct_mixed(table)
    assert info.value.null_space_dimension == 1


def test_minimum_norm_solution_reproduces_the_data(spin_one, random_density):
    quorum = MeasurementService.cone_axes(spin_one, 4, 1.0)
    rho = random_density(spin_one)
    table = MeasurementService.measure_exact(rho, quorum)
    result = ReconMixedService.reconstruct_mixed(table, allow_minimum_norm=True)
    assert not result.injective
    assert result.residual <= 1e-8
    assert result.rho_hat.matrix.trace().real == pytest.approx(1.0)


def test_inconsistent_exact_table_raises(spin_half):
    axes = (Axis.x(), Axis.y(), Axis.z(), Axis(theta=math.pi / 2, phi=math.pi / 4))
    table = IntensityTable(spin=spin_half, axes=axes, probabilities=[[1, 0], [1, 0], [0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(InconsistentDataError):
        ReconMixedService.reconstruct_mixed(table)


def test_sampled_estimate_is_projected_onto_states(spin_half):
    quorum = MeasurementService.tripod_axes()
    table = IntensityTable.from_counts(spin_half, quorum.axes, [[100, 0], [100, 0], [100, 0]], shots=100)
    result = ReconMixedService.reconstruct_mixed(table)
    assert result.projected
    assert np.linalg.eigvalsh(result.rho_hat.matrix)[0] >= -1e-12
    assert SpinCoreService.purity(result.rho_hat) == pytest.approx(1.0)


def test_project_to_states_leaves_valid_states_alone(spin_one, random_density):
    rho = random_density(spin_one)
    matrix, projected = project_to_states(rho.matrix)
    assert not projected
    assert matrix is rho.matrix


def test_quorum_must_match_table(spin_one, random_density):
    table = MeasurementService.measure_exact(random_density(spin_one), MeasurementService.cone_axes(spin_one, 5, 1.0))
    with pytest.raises(ValidationError):
        ReconMixedService.reconstruct_mixed(table, MeasurementService.cone_axes(spin_one, 5, 0.8))


def test_build_map_passes_its_linearity_check(spin_three_halves):
    quorum = MeasurementService.cone_axes(spin_three_halves, 7, 1.1)
    measurement_map = ReconMixedService.build_map(spin_three_halves, quorum, verify=True)
    assert measurement_map.matrix.shape == (28, 16)
    assert measurement_map.injective


def test_cone_scan_design(spin_one):
    design = ReconMixedService.design_axes(spin_one, 5, strategy="cone-scan")
    assert design.injective_candidates > 0
    assert 0 < design.opening_angle <= math.pi / 2
    assert 1.0 <= design.condition_number < math.inf
    assert ReconMixedService.certify_quorum(spin_one, design.quorum).injective


def test_cone_scan_without_refinement_stays_on_the_grid(spin_half):
    design = ReconMixedService.design_axes(spin_half, 3, grid_points=10, refine=False)
    step = (math.pi / 2) / 10
    assert design.opening_angle / step == pytest.approx(round(design.opening_angle / step))


def test_too_few_axes_have_no_injective_design(spin_one):
    with pytest.raises(NoInjectiveConfigurationError):
        ReconMixedService.design_axes(spin_one, 4, grid_points=12)
    with pytest.raises(NoInjectiveConfigurationError):
        ReconMixedService.design_axes(spin_one, 4, strategy="random-frames", candidates=10)


def test_random_frames_design_is_reproducible(spin_one):
    first = ReconMixedService.design_axes(spin_one, 5, strategy="random-frames", seed=3, candidates=20)
    second = ReconMixedService.design_axes(spin_one, 5, strategy="random-frames", seed=3, candidates=20)
    assert [(a.theta, a.phi) for a in first.quorum.axes] == [(a.theta, a.phi) for a in second.quorum.axes]
    assert first.condition_number == second.condition_number
    assert math.isfinite(first.condition_number)


def test_unknown_strategy(spin_one):
    with pytest.raises(ValidationError):
        ReconMixedService.design_axes(spin_one, 5, strategy="annealing")


def test_explicit_quorum_reconstruction(spin_half, random_density):
    quorum = QuorumSpec.explicit([Axis(theta=0.3, phi=0.0), Axis(theta=1.2, phi=2.0), Axis(theta=2.0, phi=4.0)])
    rho = random_density(spin_half)
    result = ReconMixedService.reconstruct_mixed(MeasurementService.measure_exact(rho, quorum))
    np.testing.assert_allclose(result.rho_hat.matrix, rho.matrix, atol=1e-10)


@pytest.mark.parametrize("two_s", [1, 2, 3, 4, 5, 6])
def test_designed_quorum_round_trip(two_s, random_density):
    spin = SpinValue(two_s=two_s)
    quorum = ReconMixedService.design_axes(spin, 2 * two_s + 1).quorum
    rho = random_density(spin, seed=20 + two_s)
    table = MeasurementService.measure_exact(rho, quorum)
    assert quorum.matches(table.axes)
    for given in (None, quorum):
        result = ReconMixedService.reconstruct_mixed(table, given)
        assert np.linalg.norm(result.rho_hat.matrix - rho.matrix) <= 1e-8
