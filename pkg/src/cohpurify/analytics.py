"""Closed-form figures of merit for coherent-state purification.

All photon numbers are mean thermal (added-noise) photon numbers. The
harmonic-type relations of the form

    1 / (N' + c/2) = 1 / (c + N1) + 1 / (c + N2)

are solved in the rearranged form ``(c (N1+N2) + 2 N1 N2) / (2 (2c + N1 + N2))``
so that large photon numbers do not lose precision to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence


class DegenerateParametersError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelPair:
    n1: float
    n2: float

    def __post_init__(self):
        for name in ("n1", "n2"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {getattr(self, name)!r}")
            object.__setattr__(self, name, v)

    @property
    def total(self) -> float:
        return self.n1 + self.n2


@dataclass(frozen=True)
class ChannelSet:
    ns: tuple[float, ...]

    def __post_init__(self):
        ns = tuple(float(v) for v in self.ns)
        if not ns:
            raise ValueError("channel set must not be empty")
        if any(not math.isfinite(v) or v < 0 for v in ns):
            raise ValueError(f"photon numbers must be finite and >= 0, got {self.ns!r}")
        object.__setattr__(self, "ns", ns)

    @property
    def copies(self) -> int:
        return len(self.ns)


def _pair(p) -> ChannelPair:
    return p if isinstance(p, ChannelPair) else ChannelPair(*p)


def _set(s) -> ChannelSet:
    return s if isinstance(s, ChannelSet) else ChannelSet(tuple(s))


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"efficiency must lie in (0, 1], got {eta!r}")
    return eta


def _harmonic_shift(c: float, n1: float, n2: float) -> float:
    """Solve 1/(N' + c/2) = 1/(c + n1) + 1/(c + n2) for N'."""
    return (c * (n1 + n2) + 2.0 * n1 * n2) / (2.0 * (2.0 * c + n1 + n2))


# --- classical baselines ---------------------------------------------------

def n_mp(pair) -> float:
    """Heterodyne both copies, average, re-prepare."""
    p = _pair(pair)
    return p.total / 4.0 + 0.5


def n_pmp(pair) -> float:
    """Measure-and-prepare post-selected on agreeing outcomes (threshold -> 0)."""
    p = _pair(pair)
    return (1.0 + p.n1) * (1.0 + p.n2) / (2.0 + p.total)


# --- deterministic Gaussian protocols --------------------------------------

def n_det(pair) -> float:
    return _pair(pair).total / 4.0


def n_det_multi(ns) -> float:
    s = _set(ns)
    return math.fsum(s.ns) / s.copies ** 2


def pmp_beats_det(pair) -> bool:
    """Evaluate (N1-N2)^2 / (2(N1+N2)+4) < 1.

    Despite the name, True means N'_PMP > N'_D, i.e. post-selected measure and
    prepare is *worse* than the deterministic interference protocol.
    """
    p = _pair(pair)
    return (p.n1 - p.n2) ** 2 / (2.0 * p.total + 4.0) < 1.0


def tailored_settings(pair) -> tuple[float, float]:
    """(T, T0) of the two-copy protocol tuned to known N1, N2."""
    p = _pair(pair)
    if p.total == 0.0:
        raise DegenerateParametersError("tailored settings are undefined for N1 = N2 = 0")
    # normalize first so tiny photon numbers do not underflow when squared
    r, q = p.n1 / p.total, p.n2 / p.total
    sq = r * r + q * q
    return q * q / sq, sq


def n_tailored(pair) -> float:
    p = _pair(pair)
    if p.n1 == 0.0 or p.n2 == 0.0:
        return 0.0
    return p.n1 * p.n2 / p.total


def n_tailored_multi(ns) -> float:
    s = _set(ns)
    if any(v == 0.0 for v in s.ns):
        return 0.0
    return 1.0 / math.fsum(1.0 / v for v in s.ns)


# --- probabilistic protocols -----------------------------------------------

def n_apd(pair, eta: float) -> float:
    """Added photons after APD post-selection on the dark port (isotropic noise)."""
    p = _pair(pair)
    return _harmonic_shift(1.0 / _check_eta(eta), p.n1, p.n2)


def s_apd(pair, eta: float) -> float:
    p = _pair(pair)
    eta = _check_eta(eta)
    return 2.0 / (2.0 + eta * p.total)


def apd_vs_tailored_gap(pair) -> float:
    p = _pair(pair)
    if p.total == 0.0:
        raise DegenerateParametersError("gap is undefined for N1 = N2 = 0")
    return (p.n1 - p.n2) ** 2 / (2.0 * p.total * (p.total + 2.0))


def n_apd_phase(pair, eta: float) -> float:
    """APD post-selection with noise confined to the P quadrature."""
    p = _pair(pair)
    return _harmonic_shift(1.0 / (2.0 * _check_eta(eta)), p.n1, p.n2)


def n_hom_phase(pair, eta: float) -> float:
    """Homodyne locked to the noisy quadrature, window -> 0."""
    p = _pair(pair)
    return _harmonic_shift(1.0 / (4.0 * _check_eta(eta)), p.n1, p.n2)


def hom_vs_tailored_gap_phase(pair) -> float:
    p = _pair(pair)
    if p.total == 0.0:
        raise DegenerateParametersError("gap is undefined for N1 = N2 = 0")
    return (p.n1 - p.n2) ** 2 / (8.0 * p.total * (0.5 + p.total))


# --- M copies, ideal APDs --------------------------------------------------

def _multi(ns) -> ChannelSet:
    s = _set(ns)
    if s.copies < 2:
        raise ValueError(f"multi-copy formulas need M >= 2 copies, got {s.copies}")
    return s


def elementary_symmetric(values: Sequence[float], k: int) -> float:
    """Sum over unordered k-subsets of the products of their members."""
    if k == 0:
        return 1.0
    return math.fsum(math.prod(c) for c in combinations(values, k))


def n_apd_multi(ns) -> float:
    """Solve 1/(N' + 1/M) = sum 1/(1 + N_i)."""
    s = _multi(ns)
    h = [1.0 / (1.0 + v) for v in s.ns]
    # 1/sum(h) - 1/M with the subtraction done term by term
    return math.fsum(v / (1.0 + v) for v in s.ns) / (s.copies * math.fsum(h))


def s_apd_multi(ns) -> float:
    s = _multi(ns)
    m = s.copies
    denom = math.fsum((m - k) * elementary_symmetric(s.ns, k) for k in range(m))
    return m / denom


def n_apd_large_m(ns) -> float:
    s = _multi(ns)
    return 1.0 / math.fsum(1.0 / (1.0 + v) for v in s.ns)


# --- derived figures -------------------------------------------------------

def fidelity(n_prime: float) -> float:
    if n_prime < 0:
        raise ValueError("n_prime must be >= 0")
    return 1.0 / (1.0 + n_prime)


def capacity(n_signal: float, n_thermal: float) -> float:
    """Classical capacity in nats of a coherent-state channel with thermal noise."""
    if n_signal < 0 or n_thermal < 0:
        raise ValueError("photon numbers must be >= 0")
    return math.log1p(n_signal / (1.0 + n_thermal))


QUANTITIES = (
    "n_apd", "s_apd", "n_det", "n_tailored", "n_pmp", "n_mp",
    "n_apd_phase", "n_hom_phase", "fidelity", "capacity",
)


def evaluate(quantity: str, n1: float, n2: float, eta: float = 1.0, n_signal: float = 1.0) -> float:
    """Evaluate a named two-copy quantity.

    ``fidelity`` and ``capacity`` refer to the APD-purified output at ``eta``.
    """
    pair = ChannelPair(n1, n2)
    table = {
        "n_apd": lambda: n_apd(pair, eta),
        "s_apd": lambda: s_apd(pair, eta),
        "n_det": lambda: n_det(pair),
        "n_tailored": lambda: n_tailored(pair),
        "n_pmp": lambda: n_pmp(pair),
        "n_mp": lambda: n_mp(pair),
        "n_apd_phase": lambda: n_apd_phase(pair, eta),
        "n_hom_phase": lambda: n_hom_phase(pair, eta),
        "fidelity": lambda: fidelity(n_apd(pair, eta)),
        "capacity": lambda: capacity(n_signal, n_apd(pair, eta)),
    }
    try:
        return table[quantity]()
    except KeyError:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}") from None


def predict(pair, eta: float = 1.0) -> dict[str, float]:
    """All two-copy predictions for one channel pair."""
    p = _pair(pair)
    out = {q: evaluate(q, p.n1, p.n2, eta) for q in QUANTITIES if q != "capacity"}
    out["pmp_beats_det"] = pmp_beats_det(p)
    if p.total > 0:
        out["tailored_T"], out["tailored_T0"] = tailored_settings(p)
        out["apd_vs_tailored_gap"] = apd_vs_tailored_gap(p)
        out["hom_vs_tailored_gap_phase"] = hom_vs_tailored_gap_phase(p)
    return out


def predict_multi(ns: Iterable[float]) -> dict[str, float]:
    s = _multi(tuple(ns))
    return {
        "n_det": n_det_multi(s),
        "n_tailored": n_tailored_multi(s),
        "n_apd": n_apd_multi(s),
        "s_apd": s_apd_multi(s),
        "n_apd_large_m": n_apd_large_m(s),
        "fidelity": fidelity(n_apd_multi(s)),
    }
