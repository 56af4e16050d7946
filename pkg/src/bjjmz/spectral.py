"""Eigendecomposition of the tridiagonal junction Hamiltonian.

Full spectra come from implicit-shift QL; the few lowest pairs from Sturm
bisection plus inverse iteration.  Eigenvector signs are canonical: the
largest-magnitude component is positive, ties going to the lowest index.
Exact degeneracies of decoupled blocks (e.g. ``T = 0``) resolve to basis
vectors ordered by ascending ``M``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .hamiltonian import JunctionParams, TridiagonalOperator, build_hamiltonian
from .parallel import map_ordered
from .spin import SpinBasis, StateVector

EPS = np.finfo(float).eps
DEGENERACY_GAP = 1e-10


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # columns aligned with eigenvalues

    def __len__(self):
        return self.eigenvalues.size

    def state(self, k: int) -> StateVector:
        basis = SpinBasis(self.vectors.shape[0] - 1)
        return StateVector(basis, self.vectors[:, k].astype(complex))

    @property
    def states(self) -> list[StateVector]:
        return [self.state(k) for k in range(len(self))]


@dataclass(frozen=True)
class GapScanRow:
    coupling: float
    eigenvalues: tuple
    gap01: float


def _fix_sign(v: np.ndarray) -> np.ndarray:
    a = np.abs(v)
    i = int(np.flatnonzero(a >= a.max() * (1 - 1e-9))[0])
    return v if v[i] >= 0 else -v


def eig_full(op: TridiagonalOperator) -> Spectrum:
    n = op.dim
    d = op.diagonal.copy()
    e = np.zeros(n)
    e[: n - 1] = op.off_diagonal
    z = np.eye(n)
    kernels.tql2(d, e, z)
    order = np.argsort(d, kind="stable")
    vals = d[order]
    vecs = z[:, order]
    for k in range(n):
        vecs[:, k] = _fix_sign(vecs[:, k])
    return Spectrum(vals, vecs)


def _blocks(op: TridiagonalOperator):
    """Split points of the unreduced diagonal blocks, as ``(start, stop)``."""
    d, e = op.diagonal, op.off_diagonal
    cut = np.abs(e) <= EPS * (np.abs(d[:-1]) + np.abs(d[1:]))
    starts = [0] + [i + 1 for i in np.flatnonzero(cut)]
    stops = starts[1:] + [op.dim]
    return list(zip(starts, stops))


def _lowest_candidates(op: TridiagonalOperator, k: int):
    vals, owners = [], []
    for start, stop in _blocks(op):
        d = np.ascontiguousarray(op.diagonal[start:stop])
        e = np.zeros(stop - start)
        e[: stop - start - 1] = op.off_diagonal[start : stop - 1]
        kk = min(k, stop - start)
        if stop - start == 1:
            w = d.copy()
        else:
            w = kernels.bisect_lowest(d, e, kk)
        vals.extend(w)
        owners.extend([(start, stop)] * kk)
    vals = np.asarray(vals)
    starts = np.array([o[0] for o in owners])
    order = np.lexsort((starts, vals))[:k]
    return vals[order], [owners[i] for i in order]


def lowest_eigenvalues(op: TridiagonalOperator, k: int) -> np.ndarray:
    if not 1 <= k <= op.dim:
        raise ValueError(f"k must be in [1, {op.dim}], got {k}")
    return _lowest_candidates(op, k)[0]


def _inverse_iteration(d, e, lams, norm):
    """Eigenvectors of one unreduced block for ascending eigenvalues ``lams``."""
    n = d.size
    if n == 1:
        return np.ones((1, len(lams)))
    out = np.zeros((n, len(lams)))
    tiny = EPS * max(norm, 1e-300)
    cluster_tol = 1e-3 * norm
    cluster_start = 0
    prev = None
    for j, lam in enumerate(lams):
        if prev is not None and lam - prev > cluster_tol:
            cluster_start = j
        if prev is not None and lam - prev < 10 * EPS * max(abs(lam), norm):
            lam = prev + 10 * EPS * max(abs(lam), norm)
        prev = lam
        rng = np.random.default_rng(7919 + j)
        x = rng.uniform(-1.0, 1.0, n)
        x /= np.linalg.norm(x)
        for it in range(12):
            kernels.shifted_solve(d, e, lam, x, tiny)
            for i in range(cluster_start, j):
                x -= (out[:, i] @ x) * out[:, i]
            nrm = np.linalg.norm(x)
            if not np.isfinite(nrm) or nrm == 0.0:
                x = rng.uniform(-1.0, 1.0, n)
                x /= np.linalg.norm(x)
                continue
            x /= nrm
            r = d * x - lam * x
            r[:-1] += e[:-1] * x[1:]
            r[1:] += e[:-1] * x[:-1]
            if np.linalg.norm(r) <= 50 * EPS * norm and it >= 1:
                break
        out[:, j] = x
    return out


def eig_lowest(op: TridiagonalOperator, k: int) -> Spectrum:
    if not 1 <= k <= op.dim:
        raise ValueError(f"k must be in [1, {op.dim}], got {k}")
    vals, owners = _lowest_candidates(op, k)
    vecs = np.zeros((op.dim, k))
    norm = op.norm_inf()
    for block in dict.fromkeys(owners):
        idx = [i for i, o in enumerate(owners) if o == block]
        start, stop = block
        d = np.ascontiguousarray(op.diagonal[start:stop])
        e = np.zeros(stop - start)
        e[: stop - start - 1] = op.off_diagonal[start : stop - 1]
        vecs[start:stop, idx] = _inverse_iteration(d, e, vals[idx], norm)
    for j in range(k):
        vecs[:, j] = _fix_sign(vecs[:, j])
    return Spectrum(vals, vecs)


def gap_scan(base: JunctionParams, coupling_grid, k: int = 2, workers=None) -> list[GapScanRow]:
    """Lowest ``k`` levels and the ground gap at each coupling of the grid."""
    grid = [float(t) for t in coupling_grid]
    if not grid:
        raise ValueError("coupling grid is empty")
    dim = base.basis.dim
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")
    kk = max(k, 2) if dim >= 2 else 1

    def row(t):
        w = lowest_eigenvalues(build_hamiltonian(base.replace(coupling=t)), kk)
        gap = float(w[1] - w[0]) if kk >= 2 else float("nan")
        return GapScanRow(t, tuple(float(v) for v in w[:k]), gap)

    return map_ordered(row, grid, workers)


def ground_state(params: JunctionParams) -> StateVector:
    op = build_hamiltonian(params)
    spec = eig_lowest(op, min(2, op.dim))
    if len(spec) > 1 and spec.eigenvalues[1] - spec.eigenvalues[0] < DEGENERACY_GAP:
        warnings.warn(
            "ground level is degenerate to within 1e-10; the returned vector "
            "is one convention-fixed member of the ground space",
            RuntimeWarning,
            stacklevel=2,
        )
    return spec.state(0)
