"""
Built-in acceptance battery behind `spintomo selftest`.

Every check is seeded from the run seed, so two runs with the same seed print
identical reports. Numbers in the details are rounded to keep them stable.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, List

import numpy as np

from app.core.config import settings
from app.exceptions.spin_exceptions import SpinTomoException
from app.schemas.measurement import Axis, IntensityTable, QuorumSpec
from app.schemas.reconstruction import PhaseVector
from app.schemas.selftest import CheckResult, SelftestReport
from app.schemas.spin import SpinValue
from app.services.spin.core import SpinCoreService
from app.services.spin.dynamics import DynamicsService
from app.services.spin.indirect import IndirectService, random_axis
from app.services.spin.measurement import MeasurementService
from app.services.spin.particle import ParticleService
from app.services.spin.recon_mixed import ReconMixedService
from app.services.spin.recon_pure import ReconPureService

logger = logging.getLogger(__name__)

QUICK_SIZES = {"mixed": 2, "pure": 3, "consistency": 10}


def random_tripod(rng: np.random.Generator, min_volume: float = 0.2) -> QuorumSpec:
    """Random non-orthogonal tripod with |triple product| above min_volume"""
    while True:
        axes = [random_axis(rng) for _ in range(3)]
        if abs(MeasurementService.triple_product(*axes)) > min_volume:
            return QuorumSpec.explicit(axes)


def generic_pure(spin: SpinValue, seed: int, margin: float = 0.05):
    """First random state from seed onwards with moduli and phase differences away from degeneracy"""
    while True:
        psi = SpinCoreService.random_pure(spin, seed)
        differences = PhaseVector.of(psi).differences()
        if np.min(np.abs(psi.amplitudes)) > margin and (
            differences.size == 0 or np.min(np.abs(np.sin(differences))) > margin
        ):
            return psi
        seed += 1


class SelftestService:
    def __init__(self, seed: int, quick: bool = False):
        self.seed = seed
        self.quick = quick

    def size(self, name: str, configured: int) -> int:
        return QUICK_SIZES[name] if self.quick else configured

    def run(self) -> SelftestReport:
        checks: List[Callable[[], CheckResult]] = [
            self.check_mixed_round_trip,
            self.check_quorum_audit,
            self.check_pure_round_trip,
            self.check_partner_census,
            self.check_number_audit,
            self.check_operator_battery,
            self.check_consistency,
            self.check_dynamics,
            self.check_particle,
        ]
        results = []
        for check in checks:
            try:
                results.append(check())
            except SpinTomoException as e:
                name = check.__name__.replace("check_", "").replace("_", "-")
                results.append(CheckResult(name=name, passed=False, detail=f"error {e.code}: {e.message}"))
            logger.info(results[-1].line())
        return SelftestReport(seed=self.seed, quick=self.quick, checks=results)

    def check_mixed_round_trip(self) -> CheckResult:
        count = self.size("mixed", settings.SELFTEST_MIXED_STATES)
        worst = 0.0
        for two_s in range(1, 7):
            spin = SpinValue(two_s=two_s)
            quorum = ReconMixedService.design_axes(spin, 2 * two_s + 1).quorum
            for index in range(count):
                rho = SpinCoreService.random_density(spin, self.seed + 1000 * two_s + index)
                table = MeasurementService.measure_exact(rho, quorum)
                rho_hat = ReconMixedService.reconstruct_mixed(table).rho_hat
                worst = max(worst, float(np.linalg.norm(rho_hat.matrix - rho.matrix)))
        return CheckResult(
            name="mixed-round-trip",
            passed=worst <= 1e-8,
            detail=f"s=1/2..3, {count} states each, max Frobenius error {'<= 1e-8' if worst <= 1e-8 else f'{worst:.1e}'}",
        )

    def check_quorum_audit(self) -> CheckResult:
        cases = [(1, 2, 1), (1, 3, 0), (2, 3, None), (2, 4, 1), (2, 5, 0)]
        parts, passed = [], True
        for two_s, count, expected in cases:
            spin = SpinValue(two_s=two_s)
            certificate = ReconMixedService.certify_quorum(spin, MeasurementService.cone_axes(spin, count, 1.0))
            ok = certificate.rank == certificate.multipole_bound and (
                certificate.deficit >= 1 if expected is None else certificate.deficit == expected
            )
            passed = passed and ok
            parts.append(f"s={spin.label} K={count} deficit {certificate.deficit}")
        return CheckResult(name="quorum-audit", passed=passed, detail="; ".join(parts))

    def check_pure_round_trip(self) -> CheckResult:
        count = self.size("pure", settings.SELFTEST_PURE_STATES)
        rng = np.random.default_rng(self.seed)
        worst = 1.0
        failures = 0
        for two_s in range(1, 9):
            spin = SpinValue(two_s=two_s)
            tripods = [MeasurementService.tripod_axes(), random_tripod(rng)]
            for index in range(count):
                psi = SpinCoreService.random_pure(spin, self.seed + 1000 * two_s + index)
                for tripod in tripods:
                    table = MeasurementService.measure_exact(psi, tripod)
                    try:
                        recovered = ReconPureService.reconstruct_pure(table).state
                    except SpinTomoException:
                        failures += 1
                        continue
                    worst = min(worst, SpinCoreService.fidelity(recovered, psi))
        passed = failures == 0 and worst >= 1.0 - 1e-8
        return CheckResult(
            name="pure-round-trip",
            passed=passed,
            detail=f"s=1/2..4, {count} states, 2 tripods, failures {failures}, "
                   f"min fidelity {'>= 1-1e-8' if worst >= 1.0 - 1e-8 else f'{worst:.10f}'}",
        )

    def check_partner_census(self) -> CheckResult:
        parts, passed = [], True
        z_only = QuorumSpec.explicit([Axis.z()])
        for two_s in range(1, 5):
            spin = SpinValue(two_s=two_s)
            psi = generic_pure(spin, self.seed + 77 * two_s)
            partners = ReconPureService.partners_nearby_axes(psi)
            response = ReconPureService.nearby_axis_response(psi)
            same_z = all(ReconPureService.verify_same_intensities(psi, c, z_only) for c in partners.candidates)
            same_response = all(
                np.max(np.abs(ReconPureService.nearby_axis_response(c) - response)) <= 1e-6 for c in partners.candidates
            )
            y_table = MeasurementService.measure_exact(psi, QuorumSpec.explicit([Axis.y()]))
            selected = ReconPureService.select_by_third_axis(partners, y_table)
            unique = SpinCoreService.fidelity(selected, psi) > 1.0 - 1e-9
            ok = len(partners) == 2 ** two_s and same_z and same_response and unique
            passed = passed and ok
            parts.append(f"s={spin.label} {len(partners)}")
        return CheckResult(name="partner-census", passed=passed, detail="candidates " + ", ".join(parts))

    def check_number_audit(self) -> CheckResult:
        audits = [ReconPureService.measured_number_audit(SpinValue(two_s=two_s)) for two_s in range(1, 9)]
        passed = all(audit.measured_numbers == audit.expected for audit in audits)
        return CheckResult(
            name="number-audit",
            passed=passed,
            detail=", ".join(f"s={audit.spin} {audit.measured_numbers}" for audit in audits),
        )

    def check_operator_battery(self) -> CheckResult:
        spin = SpinValue(two_s=3)
        rho = SpinCoreService.random_density(spin, self.seed)
        quorum = ReconMixedService.design_axes(spin, 7).quorum
        report = IndirectService.run_battery(rho, quorum, seed=self.seed)
        passed = report.operators >= 20 and report.max_deviation <= 1e-8
        return CheckResult(
            name="indirect-battery",
            passed=passed,
            detail=f"{report.operators} operators, max deviation {'<= 1e-8' if report.max_deviation <= 1e-8 else f'{report.max_deviation:.1e}'}",
        )

    def check_consistency(self) -> CheckResult:
        runs = self.size("consistency", settings.SELFTEST_CONSISTENCY_RUNS)
        spin = SpinValue(two_s=2)
        rho = SpinCoreService.random_density(spin, self.seed)
        quorum = ReconMixedService.design_axes(spin, 5).quorum
        holdout = Axis(theta=0.77, phi=0.0)
        shots = 100_000
        passes = sum(
            IndirectService.consistency_test(rho, quorum, holdout, shots=shots, seed=self.seed + run).passed
            for run in range(runs)
        )
        required = math.ceil(0.94 * runs)

        half = SpinValue(two_s=1)
        tripod = MeasurementService.tripod_axes()
        mixed = SpinCoreService.random_density(half, self.seed)
        table = MeasurementService.measure_sampled(mixed, tripod, shots, self.seed)
        counts = np.array(table.counts)
        moved = min(5000, int(counts[2, 1]))
        counts[2, 0] += moved
        counts[2, 1] -= moved
        corrupted = IntensityTable.from_counts(half, tripod.axes, counts, shots, self.seed)
        flagged = not IndirectService.consistency_test(
            mixed, tripod, holdout, shots=shots, seed=self.seed, table=corrupted
        ).passed
        return CheckResult(
            name="consistency",
            passed=passes >= required and flagged,
            detail=f"{passes}/{runs} sampled runs pass at |z| <= 4, corrupted table flagged {flagged}",
        )

    def check_dynamics(self) -> CheckResult:
        worst_closure = worst_drift = 0.0
        ratios = []
        times = DynamicsService.time_grid(0.0, 10.0, 100)
        for two_s in (1, 2):
            spin = SpinValue(two_s=two_s)
            quorum = ReconMixedService.design_axes(spin, 2 * two_s + 1).quorum
            hamiltonians = [
                DynamicsService.zeeman(spin, 1.0, Axis(theta=0.4, phi=0.3)),
                DynamicsService.quadratic(spin, 1.0, Axis.z(), kappa=0.3),
            ]
            rho = SpinCoreService.random_density(spin, self.seed + two_s)
            psi = SpinCoreService.random_pure(spin, self.seed + two_s)
            for hamiltonian in hamiltonians:
                trajectory = DynamicsService.quorum_trajectory(rho, hamiltonian, times, quorum)
                worst_closure = max(worst_closure, DynamicsService.closure_check(trajectory, hamiltonian).max_deviation)
                for state in (rho, psi):
                    drift = DynamicsService.conservation_check(state, hamiltonian, times)
                    worst_drift = max(
                        worst_drift, drift.norm_drift, drift.trace_drift, drift.purity_drift, drift.energy_drift
                    )
                coarse = DynamicsService.generator_probe(psi, hamiltonian, quorum, 1e-2).max_gap
                fine = DynamicsService.generator_probe(psi, hamiltonian, quorum, 5e-3).max_gap
                ratios.append(coarse / fine)
        ratio_ok = all(3.5 <= ratio <= 4.5 for ratio in ratios)
        passed = worst_closure <= 1e-8 and worst_drift <= 1e-12 and ratio_ok
        return CheckResult(
            name="dynamics",
            passed=passed,
            detail=f"closure {'<= 1e-8' if worst_closure <= 1e-8 else f'{worst_closure:.1e}'}, "
                   f"conservation {'<= 1e-12' if worst_drift <= 1e-12 else f'{worst_drift:.1e}'}, "
                   f"gap ratio on halving dt {min(ratios):.1f}..{max(ratios):.1f}",
        )

    def check_particle(self) -> CheckResult:
        psi = ParticleService.make_counterexample(256, 10.0)
        report = ParticleService.pauli_partner_check(psi)
        alphas = [
            (ParticleService.coherent_alpha(math.sqrt(2.0), 0.0), 1.0),
            (ParticleService.coherent_alpha(0.0, 0.0), 0.0),
            (ParticleService.coherent_alpha(1.0, 1.0, 2.0, 0.5, 1.0), (1 + 1j) / math.sqrt(2.0)),
        ]
        alpha_ok = all(abs(value - expected) <= 1e-12 for value, expected in alphas)
        return CheckResult(
            name="particle",
            passed=report.passed and alpha_ok,
            detail=f"N=256 L=10 densities equal {report.passed}, independent {report.independent}, "
                   f"coherent alpha exact {alpha_ok}",
        )
