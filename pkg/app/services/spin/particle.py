from __future__ import annotations

import logging
import math
from typing import Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.config import settings
from app.exceptions.spin_exceptions import NotOddParityError, ValidationError
from app.schemas.particle import GridWavefunction, PartnerCheckReport

logger = logging.getLogger(__name__)


def _check_grid(n_points: int, half_width: float):
    if n_points < 2 or n_points % 2:
        raise ValidationError(message=f"Grid needs an even number of points, got {n_points}")
    if not half_width > 0:
        raise ValidationError(message=f"Grid half width must be positive, got {half_width}")


class ParticleService:
    @staticmethod
    def make_odd_state(coefficients: Sequence[complex], n_points: int, half_width: float) -> GridWavefunction:
        """
        psi(x) = C * sum_k c_k x^(2k+1) * exp(-x^2/2), normalized on the grid.

        coefficients[k] multiplies x^(2k+1).
        """
        _check_grid(n_points, half_width)
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.size == 0 or not np.any(coefficients):
            raise ValidationError(message="An odd state needs at least one nonzero coefficient")
        dx = 2.0 * half_width / n_points
        x = dx * (np.arange(n_points) - n_points // 2)
        powers = np.arange(coefficients.size) * 2 + 1
        values = (coefficients[None, :] * x[:, None] ** powers[None, :]).sum(axis=1) * np.exp(-x ** 2 / 2)
        norm = math.sqrt(float(np.sum(np.abs(values) ** 2) * dx))
        return GridWavefunction(n_points=n_points, half_width=half_width, values=values / norm)

    @staticmethod
    def make_counterexample(n_points: int = 256, half_width: float = 10.0) -> GridWavefunction:
        """C (x + i x^3) exp(-x^2/2): odd, with linearly independent real and imaginary parts"""
        return ParticleService.make_odd_state([1.0, 1.0j], n_points, half_width)

    @staticmethod
    def parity_violation(psi: GridWavefunction) -> float:
        return float(np.max(np.abs(psi.values + psi.mirrored())))

    @staticmethod
    def momentum_wavefunction(values: np.ndarray, dx: float, x0: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        phi(p) = (2 pi)^(-1/2) sum_j psi(x_j) exp(-i p x_j) dx on the centered frequency grid.
        Returns (p, phi).
        """
        n_points = values.shape[0]
        p = 2.0 * math.pi * np.fft.fftfreq(n_points, dx)
        phi = dx / math.sqrt(2.0 * math.pi) * np.exp(-1j * p * x0) * np.fft.fft(values)
        return np.fft.fftshift(p), np.fft.fftshift(phi)

    @staticmethod
    def momentum_density(psi: GridWavefunction) -> Tuple[np.ndarray, np.ndarray]:
        p, phi = ParticleService.momentum_wavefunction(psi.values, psi.dx, float(psi.x[0]))
        return p, np.abs(phi) ** 2

    @staticmethod
    def gram_determinant(psi: GridWavefunction) -> float:
        """det of the Gram matrix of the normalized real and imaginary parts; 0 when either part vanishes"""
        real, imag = psi.values.real, psi.values.imag
        real_norm, imag_norm = np.linalg.norm(real), np.linalg.norm(imag)
        if real_norm == 0.0 or imag_norm == 0.0:
            return 0.0
        cosine = float(np.dot(real, imag) / (real_norm * imag_norm))
        return 1.0 - cosine ** 2

    @staticmethod
    def pauli_partner_check(psi: GridWavefunction) -> PartnerCheckReport:
        """psi and its conjugate share position and momentum densities whenever psi has definite parity"""
        violation = ParticleService.parity_violation(psi)
        if violation > settings.PARTICLE_PARITY_TOLERANCE:
            raise NotOddParityError(violation)

        partner = psi.values.conj()
        position_gap = float(np.max(np.abs(np.abs(partner) ** 2 - np.abs(psi.values) ** 2)))

        x0 = float(psi.x[0])
        p, phi = ParticleService.momentum_wavefunction(psi.values, psi.dx, x0)
        _, phi_partner = ParticleService.momentum_wavefunction(partner, psi.dx, x0)
        density, partner_density = np.abs(phi) ** 2, np.abs(phi_partner) ** 2
        momentum_gap = float(np.max(np.abs(partner_density - density)))

        dp = float(p[1] - p[0])
        parseval_gap = abs(float(np.sum(density) * dp) - float(np.sum(np.abs(psi.values) ** 2) * psi.dx))
        overlap = float(abs(np.sum(psi.values * psi.values) * psi.dx))
        independent = 1.0 - overlap ** 2 > settings.PARTICLE_INDEPENDENCE_TOLERANCE

        passed = (
            position_gap <= settings.PARTICLE_POSITION_TOLERANCE
            and momentum_gap <= settings.PARTICLE_MOMENTUM_TOLERANCE
            and parseval_gap <= settings.PARTICLE_MOMENTUM_TOLERANCE
            and independent
        )
        logger.info(
            f"Partner check on {psi.n_points} points: position gap {position_gap:.2e}, "
            f"momentum gap {momentum_gap:.2e}, |<psi*|psi>| {overlap:.6f}"
        )
        return PartnerCheckReport(
            n_points=psi.n_points,
            half_width=psi.half_width,
            position_gap=position_gap,
            momentum_gap=momentum_gap,
            parseval_gap=parseval_gap,
            overlap=overlap,
            gram_determinant=ParticleService.gram_determinant(psi),
            independent=independent,
            degenerate=not independent,
            passed=passed,
        )

    @staticmethod
    def density_tables(psi: GridWavefunction) -> Tuple[pd.DataFrame, pd.DataFrame]:
        """Plot-ready position (x, density, partner) and momentum (p, density, partner) tables"""
        partner = psi.values.conj()
        position = pd.DataFrame({
            "x": psi.x,
            "density": np.abs(psi.values) ** 2,
            "partner": np.abs(partner) ** 2,
        })
        x0 = float(psi.x[0])
        p, phi = ParticleService.momentum_wavefunction(psi.values, psi.dx, x0)
        _, phi_partner = ParticleService.momentum_wavefunction(partner, psi.dx, x0)
        momentum = pd.DataFrame({"p": p, "density": np.abs(phi) ** 2, "partner": np.abs(phi_partner) ** 2})
        return position, momentum

    @staticmethod
    def coherent_alpha(mean_x: float, mean_p: float, mass: float = 1.0, omega: float = 1.0, hbar: float = 1.0) -> complex:
        """alpha = sqrt(m w / 2 hbar) <x> + i <p> / sqrt(2 m w hbar)"""
        for name, value in (("mass", mass), ("omega", omega), ("hbar", hbar)):
            if not value > 0:
                raise ValidationError(message=f"{name} must be positive, got {value}")
        return complex(
            math.sqrt(mass * omega / (2.0 * hbar)) * mean_x,
            mean_p / math.sqrt(2.0 * mass * omega * hbar),
        )


particle_service = ParticleService()
