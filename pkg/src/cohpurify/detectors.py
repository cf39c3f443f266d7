"""Vacuum-confirming detectors used for post-selection.

Every detector exposes the probability ``P(alpha)`` that it reports "vacuum"
for an incoming coherent amplitude ``alpha`` and the discrimination ratio
``R(alpha) = P(alpha) / P(0)``.

Thresholds/windows given as ``None`` denote the zero-width limit. In that
limit the absolute acceptance probability vanishes, so ``accept_prob``
returns the ratio instead (acceptance relative to vacuum input).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import integrate, special

# Quadrature std of a coherent state: [X, P] = i/2 -> Var = 1/4.
QUAD_SIGMA = 0.5
# Below this threshold/window the closed-form limits replace quadrature.
LIMIT_SCALE = 1e-6
QUAD_RTOL = 1e-8
# Midpoint nodes over [0, pi/2] for the vectorized phase average.
PHASE_NODES = 256


class NumericalIntegrationError(ArithmeticError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative error {achieved:.3e})")
        self.achieved = achieved


class SingularParameterError(ValueError):
    pass


def _check_eff(eta: float) -> float:
    eta = float(eta)
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"efficiency must lie in [0, 1], got {eta!r}")
    return eta


def _check_scale(name: str, value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number or None (limit), got {value!r}")
    return value


def _finite_amplitude(alpha) -> complex:
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError(f"amplitude must be finite, got {alpha!r}")
    return alpha


def _window_prob(mean, half_width: float, sigma: float = QUAD_SIGMA):
    """P(|x| <= half_width) for x ~ Normal(mean, sigma^2), using lower tails."""
    m = np.abs(mean)
    return special.ndtr((half_width - m) / sigma) - special.ndtr((-half_width - m) / sigma)


def _quad(func, a: float, b: float, points=None) -> float:
    val, err, *rest = integrate.quad(func, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=200,
                                     points=points, full_output=1)
    if val != 0.0 and err > 10 * QUAD_RTOL * abs(val):
        raise NumericalIntegrationError("adaptive quadrature did not converge", err / abs(val))
    return val


# --- closed-form limits ----------------------------------------------------

def het_ratio_limit(eta: float, alpha) -> float:
    eta = _check_eff(eta)
    return math.exp(-eta * abs(complex(alpha)) ** 2)


def hom_randomized_ratio_limit(eta: float, alpha) -> float:
    """exp(-x) I0(x) with x = eta |alpha|^2 (phase-averaged homodyne, d -> 0)."""
    eta = _check_eff(eta)
    return float(special.i0e(eta * abs(complex(alpha)) ** 2))


def hom_locked_ratio(eta: float, alpha, theta: float) -> float:
    """Locked homodyne ratio; ``theta`` is the angle between alpha and the noise-free quadrature."""
    eta = _check_eff(eta)
    return math.exp(-2.0 * eta * abs(complex(alpha)) ** 2 * math.sin(theta) ** 2)


# --- detector models -------------------------------------------------------

@dataclass(frozen=True)
class Apd:
    efficiency: float = 1.0
    dark_rate: float = 0.0

    def __post_init__(self):
        _check_eff(self.efficiency)
        if not (0.0 <= self.dark_rate < 1.0):
            raise ValueError(f"dark_rate must lie in [0, 1), got {self.dark_rate!r}")

    @property
    def is_limit(self) -> bool:
        return False

    def accept_prob_array(self, alpha: np.ndarray) -> np.ndarray:
        q = 1.0 - self.dark_rate
        return q * np.exp(-q * self.efficiency * np.abs(alpha) ** 2)

    def accept_prob(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        q = 1.0 - self.dark_rate
        return q * math.exp(-q * self.efficiency * abs(alpha) ** 2)

    def ratio(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        return math.exp(-(1.0 - self.dark_rate) * self.efficiency * abs(alpha) ** 2)


@dataclass(frozen=True)
class Heterodyne:
    """Accept when the heterodyne outcome lands in the disc |gamma| <= threshold.

    Outcomes follow the normalized Q-function of sqrt(eta) * alpha, a circular
    Gaussian with E|gamma - sqrt(eta) alpha|^2 = 1.
    """

    efficiency: float = 1.0
    threshold: Optional[float] = None

    def __post_init__(self):
        _check_eff(self.efficiency)
        _check_scale("threshold", self.threshold)

    @property
    def is_limit(self) -> bool:
        return self.threshold is None or self.threshold < LIMIT_SCALE

    def _p0(self) -> float:
        return -math.expm1(-self.threshold ** 2)

    def accept_prob(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        if self.threshold is None:
            return self.ratio(alpha)
        if self.is_limit:
            return self._p0() * het_ratio_limit(self.efficiency, alpha)
        a = math.sqrt(self.efficiency) * abs(alpha)
        big_r = self.threshold
        # angular integral done analytically: (1/pi) int exp(2 r a cos phi) dphi = 2 I0(2ra)
        def radial(r):
            return 2.0 * r * math.exp(-(r - a) ** 2) * special.i0e(2.0 * r * a)
        points = [a] if 0.0 < a < big_r else None
        return min(1.0, _quad(radial, 0.0, big_r, points))

    def accept_prob_array(self, alpha: np.ndarray) -> np.ndarray:
        x = self.efficiency * np.abs(alpha) ** 2
        if self.threshold is None:
            return np.exp(-x)
        if self.is_limit:
            return self._p0() * np.exp(-x)
        # 2|gamma|^2 is noncentral chi-square, 2 dof, noncentrality 2 eta |alpha|^2
        return special.chndtr(2.0 * self.threshold ** 2, 2.0, 2.0 * x)

    def ratio(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        if self.is_limit:
            return het_ratio_limit(self.efficiency, alpha)
        return self.accept_prob(alpha) / self.accept_prob(0j)


@dataclass(frozen=True)
class HomodyneRandomized:
    """Homodyne with a uniformly random local-oscillator phase; accept if |x| <= window."""

    efficiency: float = 1.0
    window: Optional[float] = None

    def __post_init__(self):
        _check_eff(self.efficiency)
        _check_scale("window", self.window)

    @property
    def is_limit(self) -> bool:
        return self.window is None or self.window < LIMIT_SCALE

    def _p0(self) -> float:
        return math.erf(self.window / (QUAD_SIGMA * math.sqrt(2.0)))

    def accept_prob(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        if self.window is None:
            return self.ratio(alpha)
        if self.is_limit:
            return self._p0() * hom_randomized_ratio_limit(self.efficiency, alpha)
        a = math.sqrt(self.efficiency) * abs(alpha)
        if a == 0.0:
            return self._p0()
        # integrand is symmetric about pi/2
        val = _quad(lambda phi: _window_prob(a * math.cos(phi), self.window), 0.0, math.pi / 2)
        return min(1.0, val * 2.0 / math.pi)

    def accept_prob_array(self, alpha: np.ndarray) -> np.ndarray:
        x = self.efficiency * np.abs(alpha) ** 2
        if self.window is None:
            return special.i0e(x)
        if self.is_limit:
            return self._p0() * special.i0e(x)
        phis = (np.arange(PHASE_NODES) + 0.5) * (math.pi / 2 / PHASE_NODES)
        a = np.sqrt(x)
        flat = a.reshape(-1)
        acc = np.zeros(flat.shape)
        for c in np.cos(phis):
            acc += _window_prob(flat * c, self.window)
        return (acc / PHASE_NODES).reshape(a.shape)

    def ratio(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        if self.is_limit:
            return hom_randomized_ratio_limit(self.efficiency, alpha)
        return self.accept_prob(alpha) / self.accept_prob(0j)


@dataclass(frozen=True)
class HomodyneLocked:
    """Homodyne locked to the quadrature at ``lock_angle`` (pi/2 measures P)."""

    efficiency: float = 1.0
    window: Optional[float] = None
    lock_angle: float = math.pi / 2

    def __post_init__(self):
        _check_eff(self.efficiency)
        _check_scale("window", self.window)
        if not math.isfinite(self.lock_angle):
            raise ValueError("lock_angle must be finite")

    @property
    def is_limit(self) -> bool:
        return self.window is None or self.window < LIMIT_SCALE

    def _mean(self, alpha):
        return math.sqrt(self.efficiency) * np.real(alpha * np.exp(-1j * self.lock_angle))

    def _p0(self) -> float:
        return math.erf(self.window / (QUAD_SIGMA * math.sqrt(2.0)))

    def accept_prob_array(self, alpha: np.ndarray) -> np.ndarray:
        m = self._mean(alpha)
        if self.window is None:
            return np.exp(-2.0 * m ** 2)
        if self.is_limit:
            return self._p0() * np.exp(-2.0 * m ** 2)
        return _window_prob(m, self.window)

    def accept_prob(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        return float(self.accept_prob_array(np.asarray(alpha)))

    def ratio(self, alpha) -> float:
        alpha = _finite_amplitude(alpha)
        if self.is_limit:
            return float(np.exp(-2.0 * self._mean(alpha) ** 2))
        return self.accept_prob(alpha) / self.accept_prob(0j)


@dataclass(frozen=True)
class AcceptAll:
    """Deterministic protocol: every event is kept."""

    @property
    def is_limit(self) -> bool:
        return False

    def accept_prob(self, alpha) -> float:
        _finite_amplitude(alpha)
        return 1.0

    def accept_prob_array(self, alpha: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(alpha))

    def ratio(self, alpha) -> float:
        _finite_amplitude(alpha)
        return 1.0


DetectorModel = Union[Apd, Heterodyne, HomodyneRandomized, HomodyneLocked, AcceptAll]


def reports_relative(det: DetectorModel) -> bool:
    """True when ``accept_prob`` returns P(alpha)/P(0) because the window is exactly zero."""
    return getattr(det, "threshold", 0.0) is None or getattr(det, "window", 0.0) is None


def accept_prob(det: DetectorModel, alpha) -> float:
    return det.accept_prob(alpha)


def ratio(det: DetectorModel, alpha) -> float:
    return det.ratio(alpha)


def apd_fock_weights(det: Apd, n_max: int) -> list[float]:
    """No-click POVM weight on Fock states |0>..|n_max>."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    q = 1.0 - det.dark_rate
    base = 1.0 - det.efficiency * q
    return [q * base ** n for n in range(n_max + 1)]


def dark_count_mean_chaotic(det: Apd) -> float:
    """Thermal photon number in the virtual input port that reproduces the dark-count rate."""
    if det.dark_rate == 0.0:
        return 0.0
    if det.efficiency >= 1.0:
        raise SingularParameterError("dark counts cannot be modelled at unit efficiency (pole at eta = 1)")
    return det.dark_rate / ((1.0 - det.dark_rate) * (1.0 - det.efficiency))


# --- mini-grammar ----------------------------------------------------------

DETECTOR_GRAMMAR = (
    "apd:eta=<f>,pd=<f> | het:eta=<f>,(R=<f>|limit) | homr:eta=<f>,(d=<f>|limit) | "
    "homl:eta=<f>,(d=<f>|limit),angle=<f> | all"
)

_KEYS = {
    "apd": ({"eta", "pd"}, set()),
    "het": ({"eta"}, {"R", "limit"}),
    "homr": ({"eta"}, {"d", "limit"}),
    "homl": ({"eta", "angle"}, {"d", "limit"}),
}


def parse_detector(text: str) -> DetectorModel:
    """Parse the flat detector string used by the CLI, e.g. ``het:eta=0.95,R=0.001``."""
    text = text.strip()
    if text == "all":
        return AcceptAll()
    m = re.fullmatch(r"(apd|het|homr|homl):(.+)", text)
    if not m:
        raise ValueError(f"bad detector {text!r}; grammar: {DETECTOR_GRAMMAR}")
    family, body = m.groups()
    required, choice = _KEYS[family]
    values: dict[str, Optional[float]] = {}
    for item in body.split(","):
        item = item.strip()
        if item == "limit":
            key, value = "limit", None
        elif "=" in item:
            key, raw = (s.strip() for s in item.split("=", 1))
            try:
                value = float(raw)
            except ValueError:
                raise ValueError(f"bad number {raw!r} for {key!r} in detector {text!r}; "
                                 f"grammar: {DETECTOR_GRAMMAR}") from None
        else:
            raise ValueError(f"bad token {item!r} in detector {text!r}; grammar: {DETECTOR_GRAMMAR}")
        if key not in required | choice or key in values:
            raise ValueError(f"unexpected or repeated key {key!r} in detector {text!r}; "
                             f"grammar: {DETECTOR_GRAMMAR}")
        values[key] = value
    missing = required - values.keys()
    picked = choice & values.keys()
    if missing or (choice and len(picked) != 1):
        raise ValueError(f"incomplete detector {text!r}; grammar: {DETECTOR_GRAMMAR}")
    eta = values["eta"]
    width = None if "limit" in picked else values.get(next(iter(picked), ""), None)
    if family == "apd":
        return Apd(eta, values["pd"])
    if family == "het":
        return Heterodyne(eta, width)
    if family == "homr":
        return HomodyneRandomized(eta, width)
    return HomodyneLocked(eta, width, values["angle"])


def format_detector(det: DetectorModel) -> str:
    if isinstance(det, AcceptAll):
        return "all"
    if isinstance(det, Apd):
        return f"apd:eta={det.efficiency!r},pd={det.dark_rate!r}"
    if isinstance(det, Heterodyne):
        return f"het:eta={det.efficiency!r}," + ("limit" if det.threshold is None else f"R={det.threshold!r}")
    if isinstance(det, HomodyneRandomized):
        return f"homr:eta={det.efficiency!r}," + ("limit" if det.window is None else f"d={det.window!r}")
    return (f"homl:eta={det.efficiency!r}," + ("limit" if det.window is None else f"d={det.window!r}")
            + f",angle={det.lock_angle!r}")
