"""
Finite-dimensional spin algebra: spin matrices, rotations, expectations and random states.

Basis order is m descending from s to -s everywhere; hbar = 1.
"""
from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Union

import numpy as np

from app.exceptions.spin_exceptions import DimensionMismatchError, ValidationError
from app.schemas.measurement import Axis
from app.schemas.spin import DensityMatrix, GenericOperator, PureState, SpinOperators, SpinValue

logger = logging.getLogger(__name__)

StateLike = Union[PureState, DensityMatrix]
OperatorLike = Union[GenericOperator, np.ndarray]


@lru_cache(maxsize=64)
def _spin_operators(two_s: int) -> SpinOperators:
    spin = SpinValue(two_s=two_s)
    s = two_s / 2
    m = spin.m_values()
    d = spin.dimension()
    splus = np.zeros((d, d), dtype=complex)
    # S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and m+1 sits one index up
    for j in range(1, d):
        splus[j - 1, j] = math.sqrt(s * (s + 1) - m[j] * (m[j] + 1))
    sminus = splus.conj().T
    return SpinOperators(
        spin=spin,
        sx=(splus + sminus) / 2,
        sy=(splus - sminus) / 2j,
        sz=np.diag(m).astype(complex),
    )


def spectral_function(hermitean: np.ndarray, func) -> np.ndarray:
    """func applied to a hermitean matrix through its eigendecomposition"""
    eigenvalues, vectors = np.linalg.eigh(hermitean)
    return (vectors * func(eigenvalues)) @ vectors.conj().T


class SpinCoreService:
    @staticmethod
    def spin_operators(spin: SpinValue) -> SpinOperators:
        """Sx, Sy, Sz from the standard ladder construction"""
        return _spin_operators(spin.two_s)

    @staticmethod
    def rotation_operator(spin: SpinValue, rotvec) -> np.ndarray:
        """exp(-i rotvec . S); identity for a zero rotation vector"""
        rotvec = np.asarray(rotvec, dtype=float).reshape(3)
        angle = float(np.linalg.norm(rotvec))
        d = spin.dimension()
        if angle == 0.0:
            return np.eye(d, dtype=complex)
        generator = _spin_operators(spin.two_s).along(rotvec)
        return spectral_function(generator, lambda values: np.exp(-1j * values))

    @staticmethod
    def rotation_to_axis(spin: SpinValue, axis: Union[Axis, np.ndarray, list, tuple]) -> np.ndarray:
        """
        Unitary U whose column j is the eigenvector of n.S with eigenvalue m_j.

        U = exp(-i theta m.S) with m = (-sin phi, cos phi, 0), so U^dagger (n.S) U = Sz.
        """
        if not isinstance(axis, Axis):
            axis = Axis.from_vector(axis)
        if axis.theta == 0.0:
            return np.eye(spin.dimension(), dtype=complex)
        rotvec = axis.theta * np.array([-math.sin(axis.phi), math.cos(axis.phi), 0.0])
        return SpinCoreService.rotation_operator(spin, rotvec)

    @staticmethod
    def expectation(state: StateLike, op: OperatorLike) -> complex:
        """Tr(rho O); O need not be hermitean"""
        matrix = op.matrix if isinstance(op, GenericOperator) else np.asarray(op, dtype=complex)
        d = state.spin.dimension()
        if matrix.shape != (d, d):
            raise DimensionMismatchError(message=f"Operator shape {matrix.shape} does not match spin {state.spin.label}")
        if isinstance(op, GenericOperator) and op.spin.two_s != state.spin.two_s:
            raise DimensionMismatchError(message=f"Operator spin {op.spin.label} differs from state spin {state.spin.label}")
        if isinstance(state, PureState):
            psi = state.amplitudes
            return complex(np.vdot(psi, matrix @ psi))
        return complex(np.einsum("ij,ji->", state.matrix, matrix))

    @staticmethod
    def random_pure(spin: SpinValue, seed: int) -> PureState:
        """Normalized complex normal vector"""
        rng = np.random.default_rng(seed)
        d = spin.dimension()
        vector = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        return PureState.from_vector(spin, vector)

    @staticmethod
    def random_density(spin: SpinValue, seed: int, rank: int = None) -> DensityMatrix:
        """A A^dagger / Tr with A a (d x rank) complex normal matrix"""
        d = spin.dimension()
        rank = d if rank is None else rank
        if not 1 <= rank <= d:
            raise ValidationError(message=f"Rank must lie in [1, {d}], got {rank}")
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
        rho = a @ a.conj().T
        return DensityMatrix(spin=spin, matrix=rho / np.trace(rho).real)

    @staticmethod
    def as_density(state: StateLike) -> DensityMatrix:
        return state.to_density() if isinstance(state, PureState) else state

    @staticmethod
    def fidelity(psi: PureState, phi: PureState) -> float:
        """|<phi|psi>|^2"""
        return float(abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2)

    @staticmethod
    def purity(rho: DensityMatrix) -> float:
        return float(np.einsum("ij,ji->", rho.matrix, rho.matrix).real)

    @staticmethod
    def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
        return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho.matrix - sigma.matrix))))

    @staticmethod
    def operator(spin: SpinValue, matrix, name: str = None) -> GenericOperator:
        return GenericOperator(spin=spin, matrix=matrix, name=name)


spin_core_service = SpinCoreService()

