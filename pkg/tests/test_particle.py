import math

import numpy as np
import pytest

from app.core.config import settings
from app.exceptions.spin_exceptions import NotOddParityError, ValidationError
from app.schemas.particle import GridWavefunction
from app.services.spin.particle import ParticleService


@pytest.fixture
def counterexample() -> GridWavefunction:
    return ParticleService.make_counterexample(256, 10.0)


def test_grid_is_symmetric(counterexample):
    x = counterexample.x
    assert x[0] == -10.0
    assert x[128] == 0.0
    np.testing.assert_array_equal(x[1:], -x[1:][::-1])


def test_counterexample_is_odd_and_normalized(counterexample):
    assert ParticleService.parity_violation(counterexample) <= 1e-10
    assert np.sum(np.abs(counterexample.values) ** 2) * counterexample.dx == pytest.approx(1.0, abs=1e-12)


def test_conjugate_partner_shares_both_densities(counterexample):
    report = ParticleService.pauli_partner_check(counterexample)
    assert report.passed
    assert report.position_gap <= 1e-12
    assert report.momentum_gap <= 1e-10
    assert report.parseval_gap <= 1e-10
    assert report.independent
    assert not report.degenerate


def test_gram_determinant_and_overlap(counterexample):
    report = ParticleService.pauli_partner_check(counterexample)
    assert report.gram_determinant == pytest.approx(0.4, abs=1e-8)
    assert report.overlap == pytest.approx(math.sqrt(265) / 19, abs=1e-8)


def test_real_odd_state_is_degenerate():
    psi = ParticleService.make_odd_state([1.0], 256, 10.0)
    report = ParticleService.pauli_partner_check(psi)
    assert report.degenerate
    assert not report.passed
    assert report.gram_determinant == 0.0


def test_even_state_is_rejected():
    dx = 20.0 / 256
    x = dx * (np.arange(256) - 128)
    values = np.exp(-x ** 2 / 2)
    values = values / math.sqrt(np.sum(values ** 2) * dx)
    with pytest.raises(NotOddParityError):
        ParticleService.pauli_partner_check(GridWavefunction(n_points=256, half_width=10.0, values=values))


def test_grid_must_be_even():
    with pytest.raises(ValidationError):
        ParticleService.make_odd_state([1.0], 255, 10.0)
    with pytest.raises(ValidationError):
        ParticleService.make_odd_state([0.0], 256, 10.0)


def test_momentum_density_of_a_gaussian_packet():
    psi = ParticleService.make_odd_state([1.0], 256, 10.0)
    p, density = ParticleService.momentum_density(psi)
    # |phi(p)|^2 of x exp(-x^2/2) is 2 p^2 exp(-p^2) / sqrt(pi)
    expected = 2 * p ** 2 * np.exp(-p ** 2) / math.sqrt(math.pi)
    np.testing.assert_allclose(density, expected, atol=1e-10)


def test_density_tables(counterexample):
    position, momentum = ParticleService.density_tables(counterexample)
    assert list(position.columns) == ["x", "density", "partner"]
    assert list(momentum.columns) == ["p", "density", "partner"]
    assert len(position) == len(momentum) == 256
    np.testing.assert_allclose(momentum["density"], momentum["partner"], atol=1e-10)


@pytest.mark.parametrize(
    "mean_x, mean_p, args, expected",
    [
        (math.sqrt(2.0), 0.0, (), 1.0),
        (0.0, 0.0, (), 0.0),
        (0.0, math.sqrt(2.0), (), 1j),
        (1.0, 1.0, (2.0, 0.5, 1.0), (1 + 1j) / math.sqrt(2.0)),
    ],
)
def test_coherent_alpha(mean_x, mean_p, args, expected):
    assert ParticleService.coherent_alpha(mean_x, mean_p, *args) == pytest.approx(expected, abs=1e-12)


def test_coherent_alpha_needs_positive_constants():
    with pytest.raises(ValidationError):
        ParticleService.coherent_alpha(1.0, 0.0, mass=-1.0)


def test_partner_check_follows_settings(counterexample, monkeypatch):
    monkeypatch.setattr(settings, "PARTICLE_INDEPENDENCE_TOLERANCE", 0.5)
    report = ParticleService.pauli_partner_check(counterexample)
    assert not report.independent
    assert not report.passed

    monkeypatch.setattr(settings, "PARTICLE_INDEPENDENCE_TOLERANCE", 1e-6)
    assert ParticleService.pauli_partner_check(counterexample).passed
