"""Probabilistic purification of noisy coherent states: closed forms and Monte Carlo."""

from .analytics import ChannelPair, ChannelSet
from .detectors import AcceptAll, Apd, Heterodyne, HomodyneLocked, HomodyneRandomized, parse_detector
from .engine import (
    ClassicalPmpConfig, InsufficientAcceptanceError, SimulationConfig, SimulationResult,
    simulate_classical_pmp, simulate_deterministic, simulate_purification, simulate_tailored,
)
from .optics import MixingNetwork, apply_network, build_cascade, two_copy_network
from .phase_space import NoiseKind, NoiseModel, PreparationSpec

__version__ = "0.1.0"
