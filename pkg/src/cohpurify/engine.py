"""Seeded Monte Carlo estimation of purified output noise and success rate.

Samples are processed in fixed-size chunks. Chunk ``c`` draws from the
stream ``make_stream(seed, c)`` and reduces to a small vector of sums; chunk
sums are then added in chunk order. The result therefore depends only on
``(seed, samples, chunk_size)`` and never on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .analytics import ChannelPair, tailored_settings
from .detectors import AcceptAll, DetectorModel, reports_relative
from .optics import MixingNetwork, apply_network, attenuate, build_cascade, two_copy_network
from .phase_space import NoiseKind, PreparationSpec, make_stream, sample_displacements

CHUNK_SIZE = 1 << 16
N_BATCHES = 32
MIN_EFFECTIVE_SAMPLES = 100
MIN_ACCEPTED = 100


class InsufficientAcceptanceError(RuntimeError):
    """Too few (effective) accepted samples for a reliable estimate."""

    def __init__(self, message: str, success_upper_bound: float, effective_sample_size: float = 0.0):
        super().__init__(message)
        self.success_upper_bound = success_upper_bound
        self.effective_sample_size = effective_sample_size


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    def z_score(self, reference: float) -> float:
        diff = abs(self.value - reference)
        if self.stderr > 0:
            return diff / self.stderr
        return 0.0 if diff <= 1e-12 * max(1.0, abs(reference)) else math.inf


@dataclass(frozen=True)
class SimulationResult:
    n_prime: Estimate
    n_x: Estimate
    n_p: Estimate
    success: Estimate
    samples_used: int
    effective_sample_size: float
    # True when the detector is a zero-width limit: success is then E[R], the
    # acceptance rate relative to vacuum input, because the absolute rate is 0.
    relative_success: bool = False
    max_abs_signal_x: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SimulationConfig:
    prep: PreparationSpec
    detector: DetectorModel = field(default_factory=AcceptAll)
    network: Optional[MixingNetwork] = None
    samples: int = 1_000_000
    seed: int = 0
    workers: int = 1
    chunk_size: int = CHUNK_SIZE

    def __post_init__(self):
        if self.network is None:
            object.__setattr__(self, "network", build_cascade(self.prep.copies))
        if self.network.copies != self.prep.copies:
            raise ValueError(f"network has {self.network.copies} inputs but {self.prep.copies} copies are prepared")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError("samples must be an integer >= 1")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError("workers must be an integer >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ClassicalPmpConfig:
    pair: ChannelPair
    delta: float
    samples: int = 1_000_000
    seed: int = 0
    workers: int = 1
    # "conditional" samples the outcome difference inside the acceptance disc
    # directly; "rejection" draws both outcomes and discards disagreements.
    method: str = "conditional"
    chunk_size: int = CHUNK_SIZE

    def __post_init__(self):
        if not isinstance(self.pair, ChannelPair):
            object.__setattr__(self, "pair", ChannelPair(*self.pair))
        if not (self.delta > 0):
            raise ValueError(f"delta must be > 0, got {self.delta!r}")
        if self.method not in ("conditional", "rejection"):
            raise ValueError(f"method must be 'conditional' or 'rejection', got {self.method!r}")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError("samples must be an integer >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


# --- chunk machinery -------------------------------------------------------

def _chunks(samples: int, chunk_size: int) -> list[tuple[int, int, int]]:
    return [(c, start, min(chunk_size, samples - start))
            for c, start in enumerate(range(0, samples, chunk_size))]


def _map_chunks(fn: Callable, samples: int, chunk_size: int, workers: int) -> list:
    chunks = _chunks(samples, chunk_size)
    if workers == 1 or len(chunks) == 1:
        return [fn(*c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def _batch_index(start: int, n: int, samples: int) -> np.ndarray:
    g = np.arange(start, start + n, dtype=np.int64)
    return (g * N_BATCHES) // samples


@dataclass
class _Sums:
    """Weighted sums for a ratio estimator with three observables (|s|^2, x^2, p^2)."""

    n: int
    sw: float
    sw2: float
    swy: np.ndarray      # (3,)
    swy2: np.ndarray     # (3,)
    sw_wy: np.ndarray    # (3,)
    batch_w: np.ndarray  # (B,)
    batch_n: np.ndarray  # (B,)
    batch_wy: np.ndarray  # (3, B)
    max_abs_x: float

    @classmethod
    def from_samples(cls, w: np.ndarray, s: np.ndarray, batch: np.ndarray) -> "_Sums":
        ys = np.stack([np.abs(s) ** 2, s.real ** 2, s.imag ** 2])
        wy = w * ys
        accepted = w > 0
        return cls(
            n=w.size,
            sw=float(np.sum(w)),
            sw2=float(np.sum(w * w)),
            swy=wy.sum(axis=1),
            swy2=(wy * wy).sum(axis=1),
            sw_wy=(w * wy).sum(axis=1),
            batch_w=np.bincount(batch, weights=w, minlength=N_BATCHES),
            batch_n=np.bincount(batch, minlength=N_BATCHES).astype(float),
            batch_wy=np.stack([np.bincount(batch, weights=row, minlength=N_BATCHES) for row in wy]),
            max_abs_x=float(np.max(np.abs(s.real[accepted]), initial=0.0)),
        )

    def __add__(self, other: "_Sums") -> "_Sums":
        return _Sums(
            self.n + other.n, self.sw + other.sw, self.sw2 + other.sw2,
            self.swy + other.swy, self.swy2 + other.swy2, self.sw_wy + other.sw_wy,
            self.batch_w + other.batch_w, self.batch_n + other.batch_n,
            self.batch_wy + other.batch_wy, max(self.max_abs_x, other.max_abs_x),
        )


def _reduce(parts: list[_Sums]) -> _Sums:
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total


def _batch_se(values: np.ndarray) -> float:
    values = values[np.isfinite(values)]
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def _finalize(t: _Sums, relative: bool) -> SimulationResult:
    n = t.n
    if t.sw <= 0.0:
        # rule of three: 95% upper bound on an unobserved acceptance rate
        raise InsufficientAcceptanceError(
            f"no sample was accepted out of {n}; success probability is below ~{3.0 / n:.3g}",
            success_upper_bound=min(1.0, 3.0 / n))
    ess = t.sw ** 2 / t.sw2
    if ess < MIN_EFFECTIVE_SAMPLES:
        raise InsufficientAcceptanceError(
            f"effective sample size {ess:.1f} is below {MIN_EFFECTIVE_SAMPLES}; "
            "increase samples or relax the detector threshold",
            success_upper_bound=min(1.0, t.sw / n + 3.0 * math.sqrt(t.sw2) / n), effective_sample_size=ess)

    with np.errstate(invalid="ignore", divide="ignore"):
        batch_ratio = t.batch_wy / t.batch_w
    estimates = []
    for k in range(3):
        r = t.swy[k] / t.sw
        resid = max(t.swy2[k] - 2.0 * r * t.sw_wy[k] + r * r * t.sw2, 0.0)
        se_delta = math.sqrt(resid) / t.sw
        estimates.append(Estimate(float(r), max(se_delta, _batch_se(batch_ratio[k]))))

    mean_w = t.sw / n
    var_w = max(t.sw2 / n - mean_w ** 2, 0.0)
    se_w = math.sqrt(var_w / max(n - 1, 1))
    se_w_batch = _batch_se(t.batch_w / np.where(t.batch_n > 0, t.batch_n, np.nan))
    success = Estimate(float(mean_w), max(se_w, se_w_batch))
    return SimulationResult(
        n_prime=estimates[0], n_x=estimates[1], n_p=estimates[2], success=success,
        samples_used=n, effective_sample_size=float(ess), relative_success=relative,
        max_abs_signal_x=t.max_abs_x,
    )


# --- purification ----------------------------------------------------------

@dataclass(frozen=True)
class ChunkSamples:
    """Per-sample amplitudes of one chunk; ``signal`` is already unity-gain corrected."""

    betas: np.ndarray    # (n, M) input noise
    bright: np.ndarray   # (n,) bright port before the output attenuator
    signal: np.ndarray   # (n,) output noise s - alpha0
    dark: np.ndarray     # (n, M-1) dark-port amplitudes, including the target's contribution
    weights: np.ndarray  # (n,)


def _dark_offset(cfg: SimulationConfig) -> np.ndarray:
    """Dark-port amplitude contributed by the noise-free target."""
    net = cfg.network
    offset = cfg.prep.target * net.matrix[1:].sum(axis=1)
    # a balanced cascade leaves only round-off here
    offset[np.abs(offset) <= 1e-12 * (1.0 + abs(cfg.prep.target))] = 0.0
    return offset


def sample_chunk(cfg: SimulationConfig, chunk: int, n: int) -> ChunkSamples:
    rng = make_stream(cfg.seed, chunk)
    betas = np.stack([sample_displacements(ch, rng, n) for ch in cfg.prep.channels], axis=1)
    net = cfg.network
    signal, dark = apply_network(net, betas)
    bright = betas @ net.matrix[0]
    gain = net.gain
    if gain != 1.0:
        if abs(gain) == 0.0:
            raise ValueError("network has zero gain on the target amplitude")
        signal = signal / gain
    dark = dark + _dark_offset(cfg)
    w = np.ones(n)
    for j in range(dark.shape[1]):
        w = w * cfg.detector.accept_prob_array(dark[:, j])
    return ChunkSamples(betas, bright, signal, dark, w)


def simulate_purification(cfg: SimulationConfig) -> SimulationResult:
    """Estimate N' (total and per quadrature) and S for the configured scheme."""

    def work(chunk: int, start: int, n: int) -> _Sums:
        cs = sample_chunk(cfg, chunk, n)
        return _Sums.from_samples(cs.weights, cs.signal, _batch_index(start, n, cfg.samples))

    parts = _map_chunks(work, cfg.samples, cfg.chunk_size, cfg.workers)
    return _finalize(_reduce(parts), relative=reports_relative(cfg.detector))


def simulate_deterministic(cfg: SimulationConfig) -> SimulationResult:
    return simulate_purification(replace(cfg, detector=AcceptAll()))


def simulate_tailored(pair, samples: int = 1_000_000, seed: int = 0, workers: int = 1) -> SimulationResult:
    """Two-copy deterministic protocol with (T, T0) tuned to known N1, N2."""
    pair = pair if isinstance(pair, ChannelPair) else ChannelPair(*pair)
    t, t0 = tailored_settings(pair)
    prep = PreparationSpec.from_photons(NoiseKind.ISOTROPIC, (pair.n1, pair.n2))
    cfg = SimulationConfig(prep, AcceptAll(), two_copy_network(t, t0), samples, seed, workers)
    return simulate_purification(cfg)


# --- classical measure-and-prepare -----------------------------------------

def _pmp_chunk(cfg: ClassicalPmpConfig, chunk: int, start: int, n: int) -> _Sums:
    rng = make_stream(cfg.seed, chunk)
    v1, v2 = cfg.pair.n1 + 1.0, cfg.pair.n2 + 1.0  # noise plus one heterodyne vacuum unit
    batch = _batch_index(start, n, cfg.samples)
    if cfg.method == "rejection":
        z = rng.standard_normal((4, n))
        g1 = (z[0] + 1j * z[1]) * math.sqrt(v1 / 2)
        g2 = (z[2] + 1j * z[3]) * math.sqrt(v2 / 2)
        w = (np.abs(g1 - g2) < cfg.delta).astype(float)
        return _Sums.from_samples(w, (g1 + g2) / 2, batch)
    # conditional: u = g1 - g2 restricted to |u| < delta, then mean | u
    vu = v1 + v2
    u_r2 = -vu * np.log1p(rng.random(n) * math.expm1(-cfg.delta ** 2 / vu))
    u = np.sqrt(u_r2) * np.exp(2j * math.pi * rng.random(n))
    k = (v1 - v2) / (2.0 * vu)
    resid = vu / 4.0 - k * k * vu
    z = rng.standard_normal((2, n))
    m = k * u + math.sqrt(max(resid, 0.0) / 2.0) * (z[0] + 1j * z[1])
    return _Sums.from_samples(np.ones(n), m, batch)


def simulate_classical_pmp(cfg: ClassicalPmpConfig) -> SimulationResult:
    """Heterodyne both copies, keep the average only if the outcomes agree within delta."""
    parts = _map_chunks(lambda c, s, n: _pmp_chunk(cfg, c, s, n), cfg.samples, cfg.chunk_size, cfg.workers)
    total = _reduce(parts)
    if cfg.method == "rejection":
        accepted = total.sw
        if accepted < MIN_ACCEPTED:
            raise InsufficientAcceptanceError(
                f"only {int(accepted)} of {total.n} samples satisfied |a1 - a2| < {cfg.delta}; "
                "use a larger delta or more samples",
                success_upper_bound=min(1.0, (accepted + 3.0) / total.n), effective_sample_size=accepted)
        return _finalize(total, relative=False)
    res = _finalize(total, relative=False)
    vu = cfg.pair.n1 + cfg.pair.n2 + 2.0
    rate = -math.expm1(-cfg.delta ** 2 / vu)
    return replace(res, success=Estimate(rate, 0.0))


# --- symmetry of the two output copies -------------------------------------

@dataclass(frozen=True)
class SymmetryReport:
    status: str  # "ok", "failed" or "not-applicable"
    max_deviation: float
    samples: int
    reason: str = ""


def copy_symmetry_check(cfg: SimulationConfig, samples: int = 10_000, tol: float = 1e-12) -> SymmetryReport:
    """Compare the kept and lost ports of a balanced output attenuator sample by sample."""
    net = cfg.network
    if net.copies != 2 or net.t0 != 0.5:
        return SymmetryReport("not-applicable", math.nan, 0,
                              "defined only for the two-copy network with t0 = 1/2")
    n = min(samples, cfg.samples)
    cs = sample_chunk(cfg, 0, n)
    bright = cfg.prep.target * net.matrix[0].sum() + cs.bright
    kept, lost = attenuate(net.t0, bright)
    dev = float(np.max(np.abs(kept - lost)))
    return SymmetryReport("ok" if dev <= tol else "failed", dev, n)
