"""Mach-Zehnder pipeline on the junction: split, imprint, recombine, detect."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BifurcationBoundError
from .evolution import (DEFAULT_DT, DEFAULT_SAMPLE_EVERY, Schedule, Trajectory, evolve,
                        make_linear_ramp, propagate_array)
from .hamiltonian import JunctionParams, build_hamiltonian
from .metrology import noon_max_fidelity
from .parallel import map_ordered
from .spectral import eig_lowest, ground_state
from .spin import JzDistribution, SpinBasis, StateVector, jz_distribution

STRONG_COUPLING_RATIO = 10.0


@dataclass(frozen=True)
class ProtocolConfig:
    n_particles: int = 20
    charging: float = -2.0
    coupling_max: float = 40.0
    ramp_duration: float = 40.0
    delta_split: float = 0.0
    delta_detect: float | None = None  # None -> |E_C|/4
    dt: float = DEFAULT_DT
    sample_every: int = DEFAULT_SAMPLE_EVERY
    t_final_coupling: float = 0.0
    # time to switch the detection imbalance on; 0 is the sudden switch
    detect_delta_ramp: float = 0.0
    allow_weak_coupling: bool = False

    def __post_init__(self):
        if self.charging >= 0:
            raise ValueError(
                f"the interferometer needs a negative charging energy, got E_C={self.charging}"
            )
        if self.delta_detect is None:
            object.__setattr__(self, "delta_detect", abs(self.charging) / 4)
        if abs(self.delta_detect) >= abs(self.charging) / 2:
            raise BifurcationBoundError(
                f"|delta_detect|={abs(self.delta_detect)} must stay below |E_C|/2="
                f"{abs(self.charging) / 2} to avoid the dynamical bifurcation"
            )
        if self.coupling_max < STRONG_COUPLING_RATIO * abs(self.charging):
            msg = (f"coupling_max={self.coupling_max} is below {STRONG_COUPLING_RATIO:g}|E_C|;"
                   " the strong-coupling endpoint is not reached")
            if not self.allow_weak_coupling:
                raise ValueError(msg + " (set allow_weak_coupling to proceed)")
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
        if not self.ramp_duration > 0:
            raise ValueError("ramp_duration must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.detect_delta_ramp < 0:
            raise ValueError("detect_delta_ramp must be non-negative")
        SpinBasis(self.n_particles)

    @property
    def basis(self) -> SpinBasis:
        return SpinBasis(self.n_particles)

    def replace(self, **changes) -> "ProtocolConfig":
        return dataclasses.replace(self, **changes)

    def strong_params(self, delta: float | None = None) -> JunctionParams:
        d = self.delta_split if delta is None else delta
        return JunctionParams(d, self.coupling_max, self.charging, self.basis)


class InterferenceResult(NamedTuple):
    phase: float
    f0: float
    f1: float
    residual_leakage: float
    final_state: StateVector | None = None


def splitter_schedule(config: ProtocolConfig) -> Schedule:
    return make_linear_ramp(0.0, config.ramp_duration, (config.delta_split, config.coupling_max),
                            (config.delta_split, 0.0), config.charging, config.basis)


def recombiner_schedule(config: ProtocolConfig) -> Schedule:
    return make_linear_ramp(0.0, config.ramp_duration, (config.delta_split, 0.0),
                            (config.delta_split, config.coupling_max), config.charging, config.basis)


def detection_schedule(config: ProtocolConfig) -> Schedule:
    end = (config.delta_detect, config.t_final_coupling)
    tau = config.detect_delta_ramp
    if tau > 0:
        bps = ((0.0, config.delta_split, config.coupling_max),
               (tau, config.delta_detect, config.coupling_max),
               (tau + config.ramp_duration, *end))
    else:
        bps = ((0.0, config.delta_detect, config.coupling_max), (config.ramp_duration, *end))
    return Schedule(bps, config.charging, config.basis)


def split_trajectory(config: ProtocolConfig) -> Trajectory:
    initial = ground_state(config.strong_params())
    return evolve(initial, splitter_schedule(config), config.dt, config.sample_every)


def split(config: ProtocolConfig) -> StateVector:
    """Ground state at strong coupling, ramped adiabatically down to ``T = 0``."""
    initial = ground_state(config.strong_params())
    psi = propagate_array(initial.amplitudes, splitter_schedule(config), config.dt)
    return StateVector(config.basis, psi)


def phase_imprint(state: StateVector, phase: float) -> StateVector:
    """Relative phase ``phase`` between the ``M=-J`` and ``M=+J`` paths.

    Diagonal unitary ``c_M -> exp(i phase (M+J)/(2J)) c_M``; maps a NOON
    state of phase ``a`` onto the one of phase ``a + phase``.
    """
    b = state.basis
    factors = np.exp(1j * phase * (b.m_values + b.j) / (2 * b.j))
    return StateVector(b, state.amplitudes * factors)


def recombine(state: StateVector, config: ProtocolConfig) -> StateVector:
    psi = propagate_array(state.amplitudes, recombiner_schedule(config), config.dt)
    return StateVector(config.basis, psi)


def readout(state: StateVector, config: ProtocolConfig) -> tuple[float, float]:
    """Populations of the two lowest strong-coupling eigenstates."""
    spec = eig_lowest(build_hamiltonian(config.strong_params()), 2)
    f = np.abs(spec.vectors.T @ state.amplitudes) ** 2
    return float(f[0]), float(f[1])


def detect(state: StateVector, config: ProtocolConfig) -> JzDistribution:
    """Apply the detection imbalance and ramp ``T`` down; return the Jz counts law.

    The two lowest levels map onto the fully localized states ``M=-J``
    (ground) and ``M=+J`` (first excited).
    """
    psi = propagate_array(state.amplitudes, detection_schedule(config), config.dt)
    return jz_distribution(StateVector(config.basis, psi))


def interfere(split_state: StateVector, config: ProtocolConfig, phase: float,
              keep_state: bool = False) -> InterferenceResult:
    out = recombine(phase_imprint(split_state, phase), config)
    f0, f1 = readout(out, config)
    return InterferenceResult(float(phase), f0, f1, 1.0 - f0 - f1, out if keep_state else None)


def full_mz(config: ProtocolConfig, phase: float, keep_state: bool = False) -> InterferenceResult:
    return interfere(split(config), config, phase, keep_state)


def delta_scan(config: ProtocolConfig, delta_grid, workers=None) -> list[tuple[float, float]]:
    """Best NOON-family fidelity of the splitter output for each imbalance."""
    grid = [float(d) for d in delta_grid]
    if not all(math.isfinite(d) for d in grid):
        raise ValueError("delta grid must be finite")

    def point(d):
        return d, noon_max_fidelity(split(config.replace(delta_split=d))).fidelity

    return map_ordered(point, grid, workers)
