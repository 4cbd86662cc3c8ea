import math

import numpy as np
import pytest

from app.exceptions.spin_exceptions import ValidationError
from app.schemas.measurement import Axis
from app.services.spin.core import SpinCoreService
from app.utils.utils import parse_axis, parse_cone, parse_hamiltonian, parse_key_values, parse_tolerance


def test_parse_key_values():
    assert parse_key_values("a=1, b = two") == {"a": "1", "b": "two"}
    with pytest.raises(ValidationError):
        parse_key_values("a=1,b")


def test_parse_cone():
    assert parse_cone("K=5,theta=1.0") == (5, 1.0)
    assert parse_cone("K=7") == (7, None)
    for text in ("theta=1.0", "K=five", "K=5,alpha=1", "K=5,theta=nan"):
        with pytest.raises(ValidationError):
            parse_cone(text)


def test_parse_axis():
    assert parse_axis("Y") == Axis.y()
    axis = parse_axis("1.0,0.5")
    assert (axis.theta, axis.phi) == (1.0, 0.5)
    for text in ("w", "4.0,0.0", "1.0"):
        with pytest.raises(ValidationError):
            parse_axis(text)


def test_parse_zeeman(spin_half):
    hamiltonian = parse_hamiltonian("zeeman:omega=2,axis=x", spin_half)
    np.testing.assert_allclose(hamiltonian.matrix, 2 * SpinCoreService.spin_operators(spin_half).sx, atol=1e-15)


def test_parse_zeeman_with_angles(spin_one):
    hamiltonian = parse_hamiltonian(f"zeeman:omega=1,theta={math.pi / 2},phi=0", spin_one)
    np.testing.assert_allclose(hamiltonian.matrix, SpinCoreService.spin_operators(spin_one).sx, atol=1e-15)


def test_parse_quadratic(spin_one):
    ops = SpinCoreService.spin_operators(spin_one)
    hamiltonian = parse_hamiltonian("quadratic:omega=1,kappa=0.3", spin_one)
    np.testing.assert_allclose(hamiltonian.matrix, ops.sz + 0.3 * ops.sz @ ops.sz, atol=1e-15)
    assert parse_hamiltonian("zeeman:kappa=0.3", spin_one).label.startswith("quadratic")


def test_parse_hamiltonian_errors(spin_one):
    for text in ("heisenberg:omega=1", "zeeman:omega=1,beta=2", "zeeman:omega=x"):
        with pytest.raises(ValidationError):
            parse_hamiltonian(text, spin_one)


def test_parse_tolerance():
    assert parse_tolerance("exact-residual-tolerance=1e-6") == ("EXACT_RESIDUAL_TOLERANCE", 1e-6)
    for text in ("EXACT_RESIDUAL_TOLERANCE", "X=-1", "X=0"):
        with pytest.raises(ValidationError):
            parse_tolerance(text)
