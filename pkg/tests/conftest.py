import pytest
from click.testing import CliRunner

from app.core.log_config import setup_logging
from app.route.route import create_cli
from app.schemas.measurement import Axis
from app.schemas.spin import PureState, SpinValue
from app.services.spin.core import SpinCoreService
from app.services.spin.selftest import generic_pure


@pytest.fixture
def spin_half() -> SpinValue:
    return SpinValue(two_s=1)


@pytest.fixture
def spin_one() -> SpinValue:
    return SpinValue(two_s=2)


@pytest.fixture
def spin_three_halves() -> SpinValue:
    return SpinValue(two_s=3)


@pytest.fixture
def generic_state():
    """Factory for pure states with no vanishing amplitude and no degenerate phase difference"""
    def make(spin: SpinValue, seed: int = 7) -> PureState:
        return generic_pure(spin, seed)
    return make


@pytest.fixture
def random_density():
    def make(spin: SpinValue, seed: int = 3, rank: int = None):
        return SpinCoreService.random_density(spin, seed, rank)
    return make


@pytest.fixture
def tilted_axis() -> Axis:
    return Axis(theta=0.4, phi=0.3)


@pytest.fixture
def cli():
    return create_cli()


@pytest.fixture
def runner():
    yield CliRunner(mix_stderr=False)
    # the CLI rebinds the console handler to the runner's stream
    setup_logging()

