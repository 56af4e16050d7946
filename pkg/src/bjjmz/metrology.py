"""NOON-family fits, fringe visibility, Jz counting and phase estimation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .parallel import map_ordered
from .spin import JzDistribution, StateVector, jz_distribution


class NoonFit(NamedTuple):
    fidelity: float
    phase: float
    phase_defined: bool


def noon_max_fidelity(state: StateVector) -> NoonFit:
    """Maximum of ``|<NOON(phi)|psi>|^2`` over phi, and the maximizing phase.

    The optimum is ``(|c_-J| + |c_+J|)^2 / 2`` at ``phi = arg c_+J - arg c_-J``
    (reported in ``[0, 2pi)``).  The phase is undefined when either extremal
    amplitude vanishes; it is then returned as 0 with ``phase_defined=False``.
    """
    lo, hi = state.amplitudes[0], state.amplitudes[-1]
    f = 0.5 * (abs(lo) + abs(hi)) ** 2
    if lo == 0 or hi == 0:
        return NoonFit(float(f), 0.0, False)
    phi = (np.angle(hi) - np.angle(lo)) % (2 * np.pi)
    return NoonFit(float(f), float(phi), True)


def visibility(f0_values) -> float:
    f = np.asarray(f0_values, dtype=float)
    hi, lo = f.max(), f.min()
    return 0.0 if hi + lo == 0 else float((hi - lo) / (hi + lo))


@dataclass(frozen=True, eq=False)
class FringeScan:
    results: list
    visibility: float

    def column(self, name):
        return np.array([getattr(r, name) for r in self.results])


def fringe_scan(config, phi_grid, workers=None) -> FringeScan:
    """Run the interferometer once per phase of ``phi_grid`` (shared splitter)."""
    from .protocol import interfere, split

    grid = [float(p) for p in phi_grid]
    if len(grid) < 3:
        raise ValueError("fringe scan needs at least 3 phases")
    if max(grid) - min(grid) < 2 * np.pi - 1e-6:
        raise ValueError("phase grid must span at least one period (2*pi)")
    state = split(config)
    results = map_ordered(lambda p: interfere(state, config, p), grid, workers)
    return FringeScan(results, visibility([r.f0 for r in results]))


@dataclass(frozen=True)
class MeasurementRecord:
    shots: int
    counts: dict  # M -> count, every ladder value present, M ascending
    seed: int

    def count(self, m: float) -> int:
        return int(self.counts[float(m)])

    def to_json(self) -> str:
        return json.dumps({"shots": self.shots, "seed": self.seed,
                           "counts": [[m, c] for m, c in self.counts.items()]})

    @classmethod
    def from_json(cls, text: str) -> "MeasurementRecord":
        obj = json.loads(text)
        counts = {float(m): int(c) for m, c in obj["counts"]}
        return cls(int(obj["shots"]), counts, int(obj["seed"]))


def sample_measurement(state: StateVector | JzDistribution, shots: int, seed: int) -> MeasurementRecord:
    """Born-rule counts of ``M`` over ``shots`` repetitions, reproducible from ``seed``."""
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    dist = state if isinstance(state, JzDistribution) else jz_distribution(state)
    p = np.clip(dist.probabilities, 0.0, None)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(int(shots), p)
    counts = {float(m): int(c) for m, c in zip(dist.basis.m_values, draws)}
    return MeasurementRecord(int(shots), counts, int(seed))


class PhaseEstimate(NamedTuple):
    phi_hat: float
    std_error: float
    shots: int
    n_particles: int
    per_particle_error: float
    boundary: bool


def phase_estimate(f0_counts: int, shots: int, n_particles: int) -> PhaseEstimate:
    """Invert the fringe ``f0 = cos^2(phi/2)`` from counted ground-path outcomes.

    The error is the binomial standard deviation of ``f0`` propagated through
    the fringe slope; the per-particle error divides by ``N`` because the
    NOON fringe oscillates in the collective phase.  At ``f0_counts`` of 0 or
    ``shots`` the slope vanishes and ``std_error`` is instead the phase at
    which one miss in ``shots`` would be expected (``boundary=True``).
    """
    if shots < 1 or not 0 <= f0_counts <= shots:
        raise ValueError(f"need 0 <= f0_counts <= shots and shots >= 1, got {f0_counts}/{shots}")
    if n_particles < 1:
        raise ValueError("n_particles must be positive")
    p = f0_counts / shots
    phi = 2.0 * math.acos(math.sqrt(p))
    if f0_counts in (0, shots):
        err = 2.0 * math.asin(math.sqrt(1.0 / shots))
        return PhaseEstimate(phi, err, shots, n_particles, err / n_particles, True)
    slope = abs(math.sin(phi)) / 2.0
    err = math.sqrt(p * (1.0 - p)) / (math.sqrt(shots) * slope)
    return PhaseEstimate(phi, err, shots, n_particles, err / n_particles, False)


class ScalingPoint(NamedTuple):
    n_particles: int
    f0: float
    record: MeasurementRecord
    estimate: PhaseEstimate
    empirical_error: float  # spread of phi_hat over repeated runs, divided by N


class ScalingResult(NamedTuple):
    points: list
    slope: float
    empirical_slope: float


def _loglog_slope(ns, errs) -> float:
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


def heisenberg_scaling(ns, shots: int, seed: int, phase: float = math.pi / 2,
                       base_config=None, trials: int = 1000, workers=None) -> ScalingResult:
    """Per-particle phase error versus N through the full measured protocol.

    For each ``N`` the interferometer runs at collective phase ``phase``, the
    output is detected and ``shots`` Jz outcomes are drawn; the count at
    ``M=-J`` is inverted to a phase.  This is repeated ``trials`` times with
    seeds ``seed + i*trials + r`` to get an empirical spread next to the
    propagated error.  Slopes are least-squares fits of ``log(error)``
    against ``log(N)``.
    """
    from .protocol import ProtocolConfig, detect, full_mz

    base = base_config or ProtocolConfig()
    if trials < 2:
        raise ValueError("need at least two trials for an empirical spread")

    def point(item):
        i, n = item
        cfg = base.replace(n_particles=int(n))
        res = full_mz(cfg, phase, keep_state=True)
        dist = detect(res.final_state, cfg)
        m_low = -cfg.basis.j
        records = [sample_measurement(dist, shots, seed + i * trials + r) for r in range(trials)]
        phis = [phase_estimate(rec.count(m_low), shots, int(n)).phi_hat for rec in records]
        est = phase_estimate(records[0].count(m_low), shots, int(n))
        spread = float(np.std(phis, ddof=1)) / int(n)
        return ScalingPoint(int(n), res.f0, records[0], est, spread)

    points = map_ordered(point, list(enumerate(ns)), workers)
    n_arr = [p.n_particles for p in points]
    return ScalingResult(points,
                         _loglog_slope(n_arr, [p.estimate.per_particle_error for p in points]),
                         _loglog_slope(n_arr, [p.empirical_error for p in points]))
