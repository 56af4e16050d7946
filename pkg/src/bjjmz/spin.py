"""Spin-N/2 ladder basis, state vectors and reference states.

All states live in the (N+1)-dimensional basis ``|J=N/2, M>`` ordered by
ascending ``M``; index ``i`` corresponds to ``M = i - J``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb, isclose

import numpy as np

NORM_TOL = 1e-9


@dataclass(frozen=True)
class SpinBasis:
    n_particles: int

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"need at least one particle, got {self.n_particles!r}")
        object.__setattr__(self, "n_particles", int(self.n_particles))

    @property
    def j(self) -> float:
        return self.n_particles / 2

    @property
    def dim(self) -> int:
        return self.n_particles + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.j

    def index(self, m: float) -> int:
        """Array index of ladder value ``m``; raises if ``m`` is off the ladder."""
        i = m + self.j
        if not isclose(i, round(i), abs_tol=1e-9) or not 0 <= round(i) < self.dim:
            raise ValueError(f"M={m} is not on the ladder of J={self.j}")
        return int(round(i))

    def ladder(self) -> np.ndarray:
        """``sqrt(J(J+1) - M(M+1))`` for the link between M and M+1."""
        m = self.m_values[:-1]
        return np.sqrt(self.j * (self.j + 1) - m * (m + 1))


def make_basis(n_particles: int) -> SpinBasis:
    return SpinBasis(n_particles)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over a :class:`SpinBasis`."""

    basis: SpinBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_array(cls, basis: SpinBasis, amplitudes, normalize: bool = True) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex)
        if normalize:
            nrm = np.linalg.norm(a)
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            a = a / nrm
        return cls(basis, a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, m: float) -> complex:
        return complex(self.amplitudes[self.basis.index(m)])

    def to_json(self) -> str:
        return dump_state(self)


def _canonical_phase(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a)
    if nz.size:
        c = a[nz[0]]
        a = a * np.exp(-1j * np.angle(c))
        a[nz[0]] = abs(c)
    return a


def basis_state(basis: SpinBasis, m: float) -> StateVector:
    a = np.zeros(basis.dim, dtype=complex)
    a[basis.index(m)] = 1.0
    return StateVector(basis, a)


def coherent_state(basis: SpinBasis, theta: float, phi: float) -> StateVector:
    """SU(2) coherent state pointing along ``(theta, phi)`` on the Bloch sphere.

    ``theta=0`` is ``|J, +J>``; ``(pi/2, 0)`` is the maximal-``<Jx>`` state with
    real positive binomial amplitudes.  Amplitudes follow

        c_M = sqrt(C(2J, J+M)) cos(theta/2)^(J+M) sin(theta/2)^(J-M) e^{-i M phi}

    with the global phase fixed so the first nonzero amplitude is real.
    """
    n = basis.n_particles
    k = np.arange(basis.dim)  # k = J + M
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    binom = np.sqrt(np.array([comb(n, int(v)) for v in k], dtype=float))
    a = binom * c ** k * s ** (n - k) * np.exp(-1j * basis.m_values * phi)
    a = _canonical_phase(a / np.linalg.norm(a))
    return StateVector(basis, a)


def noon_state(basis: SpinBasis, phase: float) -> StateVector:
    """``(|J,-J> + e^{i phase} |J,+J>)/sqrt(2)``."""
    a = np.zeros(basis.dim, dtype=complex)
    a[0] = 1 / np.sqrt(2)
    a[-1] = np.exp(1j * phase) / np.sqrt(2)
    return StateVector(basis, a)


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.basis != b.basis:
        raise ValueError("states live in different bases")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


@dataclass(frozen=True, eq=False)
class JzDistribution:
    basis: SpinBasis
    probabilities: np.ndarray
    mean_jz: float
    variance_jz: float

    def p(self, m: float) -> float:
        return float(self.probabilities[self.basis.index(m)])

    @property
    def p_lowest(self) -> float:
        return float(self.probabilities[0])

    @property
    def p_highest(self) -> float:
        return float(self.probabilities[-1])


def jz_distribution(state: StateVector | np.ndarray, basis: SpinBasis | None = None) -> JzDistribution:
    if isinstance(state, StateVector):
        basis, amps = state.basis, state.amplitudes
    else:
        amps = np.asarray(state)
    p = np.abs(amps) ** 2
    m = basis.m_values
    mean = float(p @ m)
    var = float(p @ m ** 2 - mean ** 2)
    p.flags.writeable = False
    return JzDistribution(basis, p, mean, max(var, 0.0))


def dump_state(state: StateVector) -> str:
    """Serialize to the shared JSON state-dump format (exact round trip)."""
    return json.dumps(
        {
            "n_particles": state.basis.n_particles,
            "amplitudes": [[float(c.real), float(c.imag)] for c in state.amplitudes],
        }
    )


def load_state(text: str) -> StateVector:
    obj = json.loads(text)
    try:
        basis = SpinBasis(obj["n_particles"])
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state dump: {exc}") from exc
    return StateVector(basis, amps)
