"""Beam splitters, attenuators and the M-copy mixing cascade.

Beam splitter convention (intensity transmittance T)::

    a' =  sqrt(T) a + sqrt(1-T) b
    b' =  sqrt(1-T) a - sqrt(T) b
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

UNITARITY_TOL = 1e-12


def _check_transmittance(name: str, t: float) -> float:
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {t!r}")
    return t


def beam_splitter_matrix(t: float) -> np.ndarray:
    t = _check_transmittance("transmittance", t)
    r, s = math.sqrt(t), math.sqrt(1.0 - t)
    return np.array([[r, s], [s, -r]], dtype=np.complex128)


def beam_splitter_apply(t: float, a, b):
    """Mix two amplitudes (scalars or equally shaped arrays)."""
    t = _check_transmittance("transmittance", t)
    r, s = math.sqrt(t), math.sqrt(1.0 - t)
    return r * a + s * b, s * a - r * b


def attenuate(t0: float, a):
    """Split ``a`` into the transmitted part and the part sent to the loss port."""
    t0 = _check_transmittance("t0", t0)
    return math.sqrt(t0) * a, math.sqrt(1.0 - t0) * a


@dataclass(frozen=True)
class MixingNetwork:
    """Linear network acting on M copies followed by an output attenuator.

    Row 0 of ``matrix`` is the bright (constructive) port; rows 1..M-1 are
    the dark ports that go to the detectors.
    """

    copies: int
    matrix: np.ndarray = field(repr=False)
    t0: float
    schedule: tuple[float, ...] = ()

    def __post_init__(self):
        u = np.asarray(self.matrix, dtype=np.complex128)
        if u.shape != (self.copies, self.copies):
            raise ValueError(f"matrix must be {self.copies}x{self.copies}, got {u.shape}")
        _check_transmittance("t0", self.t0)
        err = unitarity_error(u)
        if err > UNITARITY_TOL:
            raise ValueError(f"mixing matrix is not unitary (max deviation {err:.3e})")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def gain(self) -> complex:
        """Amplitude gain seen by an input replicated on every copy."""
        return complex(math.sqrt(self.t0) * self.matrix[0].sum())

    @property
    def is_unity_gain(self) -> bool:
        return abs(self.gain - 1.0) <= 1e-12


def unitarity_error(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


def build_cascade(m: int) -> MixingNetwork:
    """Unity-gain cascade for ``m`` copies.

    Copy j (j = 2..m) is mixed into the running bright mode on a splitter
    with T_j = (j-1)/j; the splitter's second output is dark port j.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"number of copies must be an integer >= 1, got {m!r}")
    m = int(m)
    u = np.eye(m, dtype=np.complex128)
    schedule = []
    for j in range(2, m + 1):
        t = (j - 1) / j
        schedule.append(t)
        step = np.eye(m, dtype=np.complex128)
        idx = [0, j - 1]
        step[np.ix_(idx, idx)] = beam_splitter_matrix(t)
        u = step @ u
    return MixingNetwork(m, u, 1.0 / m, tuple(schedule))


def two_copy_network(t: float, t0: float) -> MixingNetwork:
    """Single splitter with arbitrary (T, T0); used by the tailored protocol."""
    return MixingNetwork(2, beam_splitter_matrix(t), _check_transmittance("t0", t0), (float(t),))


def apply_network(net: MixingNetwork, inputs):
    """Propagate amplitudes through the network.

    ``inputs`` has the copy index on its last axis (a length-M sequence, or an
    array of shape (..., M)). Returns ``(signal, dark)`` where ``signal`` is
    the attenuated bright port and ``dark`` has shape (..., M-1).
    """
    x = np.asarray(inputs, dtype=np.complex128)
    if x.shape[-1:] != (net.copies,):
        raise ValueError(f"expected {net.copies} input amplitudes, got shape {x.shape}")
    out = x @ net.matrix.T
    signal = math.sqrt(net.t0) * out[..., 0]
    dark = out[..., 1:]
    if x.ndim == 1:
        return complex(signal), [complex(v) for v in dark]
    return signal, dark


def schedule_labels(net: MixingNetwork) -> list[str]:
    """Human-readable ``T_j=p/q`` strings for a cascade."""
    labels = [f"T_{j}={_frac(t)}" for j, t in enumerate(net.schedule, start=2)]
    labels.append(f"T_0={_frac(net.t0)}")
    return labels


def _frac(x: float) -> str:
    f = Fraction(x).limit_denominator(1000)
    if abs(float(f) - x) > 1e-12:
        return repr(x)
    return str(f)


def energy_residual(net: MixingNetwork, inputs: Sequence[complex]) -> float:
    """|signal|^2/t0 + sum|dark|^2 - sum|inputs|^2 (zero for a lossless network)."""
    signal, dark = apply_network(net, inputs)
    total_in = float(np.sum(np.abs(np.asarray(inputs)) ** 2))
    bright = abs(signal) ** 2 / net.t0 if net.t0 > 0 else 0.0
    return bright + sum(abs(d) ** 2 for d in dark) - total_in
