"""Grid sweeps and Monte Carlo vs closed-form comparison reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import analytics as an
from .detectors import AcceptAll, Apd, Heterodyne, HomodyneLocked
from .engine import (
    ClassicalPmpConfig, Estimate, InsufficientAcceptanceError, SimulationConfig,
    simulate_classical_pmp, simulate_purification, simulate_tailored,
)
from .phase_space import NoiseKind, PreparationSpec

DEFAULT_RANGE = (0.0, 5.0, 0.1)
Z_LIMIT = 4.0


def grid_values(start: float, stop: float, step: float) -> list[float]:
    if not (step > 0):
        raise ValueError(f"step must be > 0, got {step!r}")
    if start > stop:
        raise ValueError(f"start {start!r} exceeds stop {stop!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


@dataclass
class SweepSpec:
    n1_range: tuple[float, float, float] = DEFAULT_RANGE
    n2_range: tuple[float, float, float] = DEFAULT_RANGE
    quantities: Sequence[str] = ("n_apd", "s_apd")
    eta: float = 1.0
    mode: str = "analytic"
    n_signal: float = 1.0
    samples: int = 100_000
    seed: int = 0
    workers: int = 1
    delta: float = 0.01

    def __post_init__(self):
        bad = [q for q in self.quantities if q not in an.QUANTITIES]
        if bad or not self.quantities:
            raise ValueError(f"unknown quantities {bad}; choose from {', '.join(an.QUANTITIES)}")
        if self.mode not in ("analytic", "mc"):
            raise ValueError(f"mode must be 'analytic' or 'mc', got {self.mode!r}")


def _mc_quantity(q: str, n1: float, n2: float, spec: SweepSpec, seed: int, cache: dict) -> Estimate:
    eta, samples, workers = spec.eta, spec.samples, spec.workers

    def purify(kind: NoiseKind, det):
        # one APD run serves n_apd, s_apd, fidelity and capacity at a grid point
        if (kind, det) not in cache:
            prep = PreparationSpec.from_photons(kind, (n1, n2))
            cache[kind, det] = simulate_purification(SimulationConfig(prep, det, None, samples, seed, workers))
        return cache[kind, det]

    if q in ("n_apd", "s_apd", "fidelity", "capacity"):
        res = purify(NoiseKind.ISOTROPIC, Apd(eta, 0.0))
        n, se = res.n_prime.value, res.n_prime.stderr
        if q == "n_apd":
            return res.n_prime
        if q == "s_apd":
            return res.success
        if q == "fidelity":
            return Estimate(an.fidelity(n), se / (1.0 + n) ** 2)
        ns = spec.n_signal
        return Estimate(an.capacity(ns, n), se * ns / ((1.0 + n) * (1.0 + n + ns)))
    if q == "n_det":
        return purify(NoiseKind.ISOTROPIC, AcceptAll()).n_prime
    if q == "n_tailored":
        if n1 + n2 == 0.0:
            return Estimate(0.0, 0.0)
        return simulate_tailored((n1, n2), samples, seed, workers).n_prime
    if q == "n_apd_phase":
        return purify(NoiseKind.PHASE, Apd(eta, 0.0)).n_prime
    if q == "n_hom_phase":
        return purify(NoiseKind.PHASE, HomodyneLocked(eta, None)).n_prime
    delta = spec.delta if q == "n_pmp" else math.inf
    return simulate_classical_pmp(ClassicalPmpConfig((n1, n2), delta, samples, seed, workers)).n_prime


def sweep(spec: SweepSpec) -> tuple[list[str], list[list[float]]]:
    """Tabulate quantities over the (N1, N2) grid; returns (header, rows)."""
    n1s, n2s = grid_values(*spec.n1_range), grid_values(*spec.n2_range)
    if not n1s or not n2s:
        raise ValueError("sweep grid is empty")
    header = ["n1", "n2"]
    for q in spec.quantities:
        header += [q] if spec.mode == "analytic" else [q, f"{q}_se"]
    rows = []
    index = 0
    for n1 in n1s:
        for n2 in n2s:
            row = [n1, n2]
            if spec.mode == "analytic":
                row += [an.evaluate(q, n1, n2, spec.eta, spec.n_signal) for q in spec.quantities]
            else:
                seed, cache = point_seed(spec.seed, index), {}
                for q in spec.quantities:
                    est = _mc_quantity(q, n1, n2, spec, seed, cache)
                    row += [est.value, est.stderr]
            rows.append(row)
            index += 1
    return header, rows


# --- comparison harness ----------------------------------------------------

@dataclass
class CaseResult:
    scenario: str
    case: str
    quantity: str
    analytic: float
    mc: float
    stderr: float
    z: float
    passed: bool
    note: str = ""


@dataclass
class CompareReport:
    cases: list[CaseResult] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for c in self.cases)

    def max_abs_z(self) -> float:
        return max((c.z for c in self.cases), default=0.0)


def _check(report: CompareReport, scenario: str, case: str, quantity: str,
           analytic: float, est: Estimate, note: str = "") -> None:
    z = est.z_score(analytic)
    report.cases.append(CaseResult(scenario, case, quantity, analytic, est.value, est.stderr, z,
                                   z <= Z_LIMIT, note))


def _exact(report: CompareReport, scenario: str, case: str, quantity: str, expected: float, got: float) -> None:
    ok = got == expected
    report.cases.append(CaseResult(scenario, case, quantity, expected, got, 0.0,
                                   0.0 if ok else math.inf, ok, "exact"))


def _purify(kind, ns, det, samples, seed, workers):
    prep = PreparationSpec.from_photons(kind, ns)
    return simulate_purification(SimulationConfig(prep, det, None, samples, seed, workers))


def _sc_two_copy_apd(r, samples, seed, workers):
    for eta in (0.4, 1.0):
        for n1, n2 in ((0.0, 0.0), (1.0, 3.0), (0.5, 10.0), (3.0, 3.0)):
            case = f"N=({n1:g},{n2:g}) eta={eta:g}"
            res = _purify(NoiseKind.ISOTROPIC, (n1, n2), Apd(eta, 0.0), samples, seed, workers)
            _check(r, "two-copy-apd", case, "n_prime", an.n_apd((n1, n2), eta), res.n_prime)
            _check(r, "two-copy-apd", case, "success", an.s_apd((n1, n2), eta), res.success)


def _sc_het_limit(r, samples, seed, workers):
    for eta in (0.5, 0.95):
        pair = (1.0, 3.0)
        res = _purify(NoiseKind.ISOTROPIC, pair, Heterodyne(eta, None), samples, seed, workers)
        case = f"N=(1,3) eta={eta:g}"
        _check(r, "two-copy-het-limit", case, "n_prime", an.n_apd(pair, eta), res.n_prime)
        _check(r, "two-copy-het-limit", case, "relative_success", an.s_apd(pair, eta), res.success)


def _sc_deterministic(r, samples, seed, workers):
    for ns in ((1.0, 3.0), (0.5, 10.0), (1.0, 1.0, 1.0), (0.0, 2.0, 4.0, 6.0)):
        res = _purify(NoiseKind.ISOTROPIC, ns, AcceptAll(), samples, seed, workers)
        _check(r, "deterministic", f"N={ns}", "n_prime", an.n_det_multi(ns), res.n_prime)


def _sc_tailored(r, samples, seed, workers):
    for pair in ((1.0, 3.0), (2.0, 2.0), (0.0, 5.0), (0.5, 10.0)):
        res = simulate_tailored(pair, samples, seed, workers)
        _check(r, "tailored", f"N={pair}", "n_prime", an.n_tailored(pair), res.n_prime)


def _sc_phase_apd(r, samples, seed, workers):
    for pair in ((1.0, 3.0), (0.5, 10.0)):
        res = _purify(NoiseKind.PHASE, pair, Apd(1.0, 0.0), samples, seed, workers)
        _check(r, "phase-apd", f"N={pair}", "n_p", an.n_apd_phase(pair, 1.0), res.n_p)
        _exact(r, "phase-apd", f"N={pair}", "n_x", 0.0, res.n_x.value)
        _exact(r, "phase-apd", f"N={pair}", "max_abs_signal_x", 0.0, res.max_abs_signal_x)


def _sc_phase_hom(r, samples, seed, workers):
    for pair in ((1.0, 3.0), (0.5, 10.0)):
        res = _purify(NoiseKind.PHASE, pair, HomodyneLocked(1.0, None), samples, seed, workers)
        _check(r, "phase-locked-hom", f"N={pair}", "n_p", an.n_hom_phase(pair, 1.0), res.n_p)
        _exact(r, "phase-locked-hom", f"N={pair}", "n_x", 0.0, res.n_x.value)
        _exact(r, "phase-locked-hom", f"N={pair}", "max_abs_signal_x", 0.0, res.max_abs_signal_x)


def _sc_multicopy_m3(r, samples, seed, workers):
    for ns in ((1.0, 2.0, 3.0), (0.5, 0.5, 4.0)):
        res = _purify(NoiseKind.ISOTROPIC, ns, Apd(1.0, 0.0), samples, seed, workers)
        _check(r, "multicopy-M3", f"N={ns}", "n_prime", an.n_apd_multi(ns), res.n_prime)
        _check(r, "multicopy-M3", f"N={ns}", "success", an.s_apd_multi(ns), res.success)


def _sc_multicopy_m4_symmetric(r, samples, seed, workers):
    for n in (0.5, 1.0, 3.0):
        ns = (n,) * 4
        res = _purify(NoiseKind.ISOTROPIC, ns, Apd(1.0, 0.0), samples, seed, workers)
        _check(r, "multicopy-M4-symmetric", f"N={n:g}", "n_prime", n / 4, res.n_prime)
        _check(r, "multicopy-M4-symmetric", f"N={n:g}", "success", (1.0 / (1.0 + n)) ** 3, res.success)


def _sc_classical(r, samples, seed, workers):
    for pair in ((1.0, 3.0), (0.0, 0.0)):
        res = simulate_classical_pmp(ClassicalPmpConfig(pair, 1e-3, samples, seed, workers))
        _check(r, "classical-pmp", f"N={pair} delta=1e-3", "n_prime", an.n_pmp(pair), res.n_prime)
        res = simulate_classical_pmp(ClassicalPmpConfig(pair, math.inf, samples, seed, workers))
        _check(r, "classical-pmp", f"N={pair} delta=inf", "n_prime", an.n_mp(pair), res.n_prime)


SCENARIOS: dict[str, Callable] = {
    "two-copy-apd": _sc_two_copy_apd,
    "two-copy-het-limit": _sc_het_limit,
    "deterministic": _sc_deterministic,
    "tailored": _sc_tailored,
    "phase-apd": _sc_phase_apd,
    "phase-locked-hom": _sc_phase_hom,
    "multicopy-M3": _sc_multicopy_m3,
    "multicopy-M4-symmetric": _sc_multicopy_m4_symmetric,
    "classical-pmp": _sc_classical,
}


def compare(scenarios: Optional[Sequence[str]] = None, samples: int = 200_000,
            seed: int = 0, workers: int = 1) -> CompareReport:
    names = list(SCENARIOS) if not scenarios else list(scenarios)
    unknown = [s for s in names if s not in SCENARIOS]
    if unknown:
        raise ValueError(f"unknown scenarios {unknown}; choose from {', '.join(SCENARIOS)}")
    report = CompareReport()
    for i, name in enumerate(names):
        try:
            SCENARIOS[name](report, samples, point_seed(seed, i), workers)
        except (InsufficientAcceptanceError, ArithmeticError, ValueError) as exc:
            report.errors.append(f"{name}: {exc}")
    return report
