"""Coherent amplitudes and Gaussian displacement noise.

Amplitudes are plain Python ``complex`` numbers (``a = X + iP``); arrays of
amplitudes are numpy ``complex128`` arrays. A coherent state has quadrature
variance 1/4, so ``|alpha|^2`` is a mean photon number.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ComplexAmplitude = complex


class NoiseKind(enum.Enum):
    ISOTROPIC = "isotropic"
    PHASE = "phase"

    @classmethod
    def parse(cls, text: str) -> "NoiseKind":
        aliases = {"isotropic": cls.ISOTROPIC, "phase": cls.PHASE, "phase-quadrature": cls.PHASE}
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown noise kind {text!r}; expected 'isotropic' or 'phase'") from None


@dataclass(frozen=True)
class NoiseModel:
    """Distribution of the preparation displacement beta.

    ISOTROPIC: circular complex Gaussian with E|beta|^2 = n_thermal.
    PHASE: beta_R = 0, beta_I ~ Normal(0, n_thermal).
    """

    kind: NoiseKind
    n_thermal: float

    def __post_init__(self):
        if not isinstance(self.kind, NoiseKind):
            raise TypeError("kind must be a NoiseKind")
        n = float(self.n_thermal)
        if not math.isfinite(n) or n < 0:
            raise ValueError(f"n_thermal must be finite and >= 0, got {self.n_thermal!r}")
        object.__setattr__(self, "n_thermal", n)

    @classmethod
    def isotropic(cls, n: float) -> "NoiseModel":
        return cls(NoiseKind.ISOTROPIC, n)

    @classmethod
    def phase(cls, n: float) -> "NoiseModel":
        return cls(NoiseKind.PHASE, n)

    @property
    def quadrature_variances(self) -> tuple[float, float]:
        """(Var beta_R, Var beta_I)."""
        if self.kind is NoiseKind.ISOTROPIC:
            return self.n_thermal / 2, self.n_thermal / 2
        return 0.0, self.n_thermal


@dataclass(frozen=True)
class PreparationSpec:
    target: complex
    channels: tuple[NoiseModel, ...]

    def __post_init__(self):
        channels = tuple(self.channels)
        if not channels:
            raise ValueError("at least one noisy copy is required")
        kinds = {ch.kind for ch in channels}
        if len(kinds) > 1:
            raise ValueError("all channels must share one noise kind; mixed preparations are not supported")
        target = complex(self.target)
        if not (math.isfinite(target.real) and math.isfinite(target.imag)):
            raise ValueError("target amplitude must be finite")
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "target", target)

    @classmethod
    def from_photons(cls, kind: NoiseKind, ns: Sequence[float], target: complex = 0j) -> "PreparationSpec":
        return cls(target, tuple(NoiseModel(kind, n) for n in ns))

    @property
    def copies(self) -> int:
        return len(self.channels)

    @property
    def kind(self) -> NoiseKind:
        return self.channels[0].kind

    @property
    def n_values(self) -> tuple[float, ...]:
        return tuple(ch.n_thermal for ch in self.channels)


def make_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Counter-based generator addressed by ``(seed, stream_id)``.

    Philox is keyed by both values, so streams never overlap and a stream's
    draws do not depend on which worker consumes it.
    """
    if seed < 0 or stream_id < 0:
        raise ValueError("seed and stream_id must be non-negative")
    key = (int(seed) & (2**64 - 1)) | ((int(stream_id) & (2**64 - 1)) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_displacements(noise: NoiseModel, stream: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` displacements as a complex array."""
    var_re, var_im = noise.quadrature_variances
    out = np.zeros(size, dtype=np.complex128)
    if noise.n_thermal == 0.0:
        return out
    if noise.kind is NoiseKind.ISOTROPIC:
        z = stream.standard_normal((size, 2))
        out.real = z[:, 0] * math.sqrt(var_re)
        out.imag = z[:, 1] * math.sqrt(var_im)
    else:
        out.imag = stream.standard_normal(size) * math.sqrt(var_im)
    return out


def sample_displacement(noise: NoiseModel, stream: np.random.Generator) -> complex:
    return complex(sample_displacements(noise, stream, 1)[0])


def noise_mean_photons(noise: NoiseModel) -> float:
    return noise.n_thermal
