import numpy as np
import pytest

from app.exceptions.spin_exceptions import HoldoutInQuorumError, NotInjectiveError
from app.schemas.measurement import Axis, IntensityTable
from app.schemas.spin import SpinValue
from app.services.spin.core import SpinCoreService
from app.services.spin.indirect import IndirectService
from app.services.spin.measurement import MeasurementService

HOLDOUT = Axis(theta=0.77, phi=0.0)


def test_operator_battery_catalogue(spin_three_halves):
    operators = IndirectService.operator_battery(spin_three_halves, seed=0)
    names = [operator.name for operator in operators]
    assert len(operators) == 25
    assert len(set(names)) == len(names)
    assert sum(not operator.is_hermitean() for operator in operators) >= 5


@pytest.mark.parametrize("two_s", [1, 2, 3])
def test_battery_on_exact_data(two_s, random_density):
    spin = SpinValue(two_s=two_s)
    quorum = MeasurementService.cone_axes(spin, 2 * two_s + 1, 1.0)
    report = IndirectService.run_battery(random_density(spin), quorum, seed=4)
    assert report.operators == 25
    assert report.max_deviation <= 1e-8


def test_battery_through_pure_reconstruction(spin_one, random_density):
    report = IndirectService.run_battery(random_density(spin_one), MeasurementService.tripod_axes(), seed=4, pure=True)
    assert report.max_deviation <= 1e-6


def test_indirect_expectation_of_a_ladder_operator(spin_half, random_density):
    rho = random_density(spin_half)
    quorum = MeasurementService.tripod_axes()
    table = MeasurementService.measure_exact(rho, quorum)
    ops = SpinCoreService.spin_operators(spin_half)
    result = IndirectService.indirect_expectation(table, None, SpinCoreService.operator(spin_half, ops.splus, "s+"))
    assert result.value == pytest.approx(SpinCoreService.expectation(rho, ops.splus), abs=1e-10)
    assert result.rho_source.method == "linear-inversion"


def test_indirect_expectation_needs_an_injective_quorum(spin_one, random_density):
    table = MeasurementService.measure_exact(random_density(spin_one), MeasurementService.cone_axes(spin_one, 4, 1.0))
    operator = SpinCoreService.operator(spin_one, np.eye(3))
    with pytest.raises(NotInjectiveError):
        IndirectService.indirect_expectation(table, None, operator)


def test_pure_path_reports_its_method(spin_one):
    psi = SpinCoreService.random_pure(spin_one, 5)
    table = MeasurementService.measure_exact(psi, MeasurementService.tripod_axes())
    ops = SpinCoreService.spin_operators(spin_one)
    result = IndirectService.indirect_expectation(table, None, SpinCoreService.operator(spin_one, ops.sz @ ops.sx), pure=True)
    assert result.rho_source.method == "pure-tripod"
    assert result.value == pytest.approx(SpinCoreService.expectation(psi, ops.sz @ ops.sx), abs=1e-7)


def test_holdout_must_lie_outside_the_quorum(spin_one, random_density):
    quorum = MeasurementService.cone_axes(spin_one, 5, 1.0)
    with pytest.raises(HoldoutInQuorumError):
        IndirectService.consistency_test(random_density(spin_one), quorum, quorum.axes[2])


def test_exact_consistency(spin_one, random_density):
    quorum = MeasurementService.cone_axes(spin_one, 5, 1.0)
    report = IndirectService.consistency_test(random_density(spin_one), quorum, HOLDOUT)
    assert report.mode == "exact"
    assert report.passed
    assert report.max_abs_difference <= 1e-10
    assert report.z_scores is None


def test_sampled_consistency_report(spin_one, random_density):
    quorum = MeasurementService.cone_axes(spin_one, 5, 1.0)
    report = IndirectService.consistency_test(random_density(spin_one), quorum, HOLDOUT, shots=100_000, seed=2)
    assert report.mode == "sampled"
    assert len(report.z_scores) == 3
    assert report.max_abs_z == pytest.approx(max(abs(z) for z in report.z_scores))
    assert sum(report.direct) == pytest.approx(1.0)


def test_corrupted_table_is_flagged(spin_half, random_density):
    rho = random_density(spin_half)
    tripod = MeasurementService.tripod_axes()
    shots = 100_000
    table = MeasurementService.measure_sampled(rho, tripod, shots, seed=0)
    counts = np.array(table.counts)
    moved = min(5000, int(counts[2, 1]))
    counts[2, 0] += moved
    counts[2, 1] -= moved
    corrupted = IntensityTable.from_counts(spin_half, tripod.axes, counts, shots, 0)
    report = IndirectService.consistency_test(rho, tripod, HOLDOUT, shots=shots, seed=0, table=corrupted)
    assert not report.passed


def test_prediction_variance_shrinks_with_shots(spin_one, random_density):
    rho = random_density(spin_one)
    quorum = MeasurementService.cone_axes(spin_one, 5, 1.0)
    fitted = MeasurementService.measure_exact(rho, quorum).probabilities
    small = IndirectService.prediction_variance(spin_one, quorum, HOLDOUT, fitted, 1000)
    large = IndirectService.prediction_variance(spin_one, quorum, HOLDOUT, fitted, 100_000)
    np.testing.assert_allclose(large * 100, small, rtol=1e-12)
    assert np.all(small >= 0)


@pytest.mark.slow
def test_sampled_consistency_pass_rate(spin_one, random_density):
    rho = random_density(spin_one)
    quorum = MeasurementService.cone_axes(spin_one, 5, 1.0)
    runs = 50
    passes = sum(
        IndirectService.consistency_test(rho, quorum, HOLDOUT, shots=100_000, seed=seed).passed for seed in range(runs)
    )
    assert passes >= 47
