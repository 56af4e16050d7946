"""Two-mode junction Hamiltonian ``delta*Jz - T*Jx + E_C*Jz**2/2`` in the Jz basis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spin import SpinBasis, StateVector


@dataclass(frozen=True)
class JunctionParams:
    delta: float
    coupling: float
    charging: float
    basis: SpinBasis

    def __post_init__(self):
        for name in ("delta", "coupling", "charging"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    def replace(self, **changes) -> "JunctionParams":
        kw = dict(delta=self.delta, coupling=self.coupling, charging=self.charging, basis=self.basis)
        kw.update(changes)
        return JunctionParams(**kw)


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Real symmetric tridiagonal matrix; ``off_diagonal[i]`` links ``i`` and ``i+1``."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float)
        e = np.array(self.off_diagonal, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise ValueError("diagonal must be a non-empty 1-d sequence")
        if e.shape != (d.size - 1,):
            raise ValueError(f"off_diagonal must have length {d.size - 1}, got {e.size}")
        d.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "off_diagonal", e)

    @property
    def dim(self) -> int:
        return self.diagonal.size

    def norm_inf(self) -> float:
        """Max absolute row sum."""
        r = np.abs(self.diagonal).copy()
        r[:-1] += np.abs(self.off_diagonal)
        r[1:] += np.abs(self.off_diagonal)
        return float(r.max())

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)


def build_hamiltonian(params: JunctionParams) -> TridiagonalOperator:
    m = params.basis.m_values
    diag = params.delta * m + 0.5 * params.charging * m ** 2
    off = -0.5 * params.coupling * params.basis.ladder()
    return TridiagonalOperator(diag, off)


def apply(op: TridiagonalOperator, state) -> np.ndarray:
    """``op @ x`` for a state or raw vector; the result is not renormalized."""
    x = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
    if x.shape != (op.dim,):
        raise ValueError(f"dimension mismatch: operator {op.dim}, vector {x.shape}")
    y = op.diagonal * x
    y[:-1] += op.off_diagonal * x[1:]
    y[1:] += op.off_diagonal * x[:-1]
    return y


def lambda_param(n: int, charging: float, coupling: float) -> float:
    """Interaction-to-tunnelling ratio ``N|E_C|/(2T)``."""
    if coupling == 0:
        raise ValueError("lambda diverges at zero coupling")
    return n * abs(charging) / (2 * coupling)
