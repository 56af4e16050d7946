import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bjjmz.hamiltonian import JunctionParams, TridiagonalOperator, build_hamiltonian
from bjjmz.spectral import eig_full, eig_lowest, gap_scan, ground_state, lowest_eigenvalues
from bjjmz.spin import SpinBasis, basis_state, coherent_state, fidelity


def charpoly_roots(d, e):
    """Roots of det(x - H) from the three-term determinant recurrence."""
    p_prev = np.poly1d([1.0])
    p = np.poly1d([1.0, -d[0]])
    for i in range(1, len(d)):
        p, p_prev = np.poly1d([1.0, -d[i]]) * p - e[i - 1] ** 2 * p_prev, p
    return np.sort(np.roots(p.coeffs).real)


def random_params(rng, n):
    return JunctionParams(rng.uniform(-1, 1), rng.uniform(0, 50), rng.uniform(-3, 3), SpinBasis(n))


def residuals(op, spec):
    h = op.to_dense()
    return np.linalg.norm(h @ spec.vectors - spec.vectors * spec.eigenvalues, axis=0)


def test_two_particle_analytic():
    op = build_hamiltonian(JunctionParams(0.0, 1.0, -2.0, SpinBasis(2)))
    w = eig_full(op).eigenvalues
    assert np.allclose(w, [(-1 - math.sqrt(5)) / 2, -1.0, (-1 + math.sqrt(5)) / 2], atol=1e-13)


def test_pure_tunnelling_spectrum():
    op = build_hamiltonian(JunctionParams(0.0, 2.0, 0.0, SpinBasis(2)))
    assert np.allclose(eig_full(op).eigenvalues, [-2, 0, 2], atol=1e-14)


def test_diagonal_limit_returns_extremal_basis_states():
    op = build_hamiltonian(JunctionParams(0.0, 0.0, -2.0, SpinBasis(20)))
    for spec in (eig_full(op), eig_lowest(op, 2)):
        assert spec.eigenvalues[0] == spec.eigenvalues[1] == -100.0
        b = SpinBasis(20)
        assert fidelity(spec.state(0), basis_state(b, -10)) == 1.0
        assert fidelity(spec.state(1), basis_state(b, 10)) == 1.0


def test_strong_coupling_ground_energy_matches_dense():
    op = build_hamiltonian(JunctionParams(0.0, 40.0, -2.0, SpinBasis(20)))
    ref = np.linalg.eigvalsh(op.to_dense())
    assert eig_full(op).eigenvalues[0] == pytest.approx(ref[0], abs=1e-11)
    assert lowest_eigenvalues(op, 1)[0] == pytest.approx(ref[0], abs=1e-11)


@pytest.mark.parametrize("n", range(1, 7))
def test_characteristic_polynomial_oracle(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(50):
        op = build_hamiltonian(random_params(rng, n))
        roots = charpoly_roots(op.diagonal, op.off_diagonal)
        scale = max(1.0, op.norm_inf())
        assert np.max(np.abs(eig_full(op).eigenvalues - roots)) <= 1e-8 * scale


@pytest.mark.parametrize("n", [20, 200])
def test_residuals_and_orthogonality(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        op = build_hamiltonian(random_params(rng, n))
        spec = eig_full(op)
        assert np.all(np.diff(spec.eigenvalues) >= 0)
        assert np.max(residuals(op, spec)) <= 1e-10 * op.norm_inf()
        gram = spec.vectors.T @ spec.vectors
        assert np.max(np.abs(gram - np.eye(op.dim))) <= 1e-10


def test_lowest_pairs_match_full_decomposition():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(1, 41))
        op = build_hamiltonian(random_params(rng, n))
        k = int(rng.integers(1, op.dim + 1))
        full, part = eig_full(op), eig_lowest(op, k)
        norm = max(op.norm_inf(), 1e-300)
        assert np.max(np.abs(full.eigenvalues[:k] - part.eigenvalues)) <= 1e-9 * max(norm, 1.0)
        assert np.max(residuals(op, part)) <= 1e-10 * norm
        w = full.eigenvalues
        # vectors are unique only up to rotations inside near-degenerate clusters
        for j in range(k):
            cluster = np.flatnonzero(np.abs(w - w[j]) <= 1e-5 * norm)
            if cluster.size == 1:
                assert np.max(np.abs(full.vectors[:, j] - part.vectors[:, j])) <= 1e-9
            elif cluster.max() < k:
                pf = full.vectors[:, cluster] @ full.vectors[:, cluster].T
                pp = part.vectors[:, cluster] @ part.vectors[:, cluster].T
                assert np.max(np.abs(pf - pp)) <= 1e-9


def test_eig_lowest_all_levels_equals_full():
    op = build_hamiltonian(JunctionParams(0.2, 3.0, -1.0, SpinBasis(12)))
    full, part = eig_full(op), eig_lowest(op, op.dim)
    assert np.allclose(full.eigenvalues, part.eigenvalues, atol=1e-12)
    assert np.allclose(full.vectors, part.vectors, atol=1e-9)


def test_k_out_of_range():
    op = build_hamiltonian(JunctionParams(0.0, 1.0, -1.0, SpinBasis(3)))
    for bad in (0, 5):
        with pytest.raises(ValueError):
            eig_lowest(op, bad)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.floats(-2, 2), st.floats(0, 40), st.floats(-3, 3))
def test_trace_and_interlacing(n, delta, coupling, charging):
    op = build_hamiltonian(JunctionParams(delta, coupling, charging, SpinBasis(n)))
    w = eig_full(op).eigenvalues
    norm = max(op.norm_inf(), 1.0)
    assert abs(w.sum() - op.diagonal.sum()) <= 1e-9 * norm * op.dim
    if op.dim > 1:
        sub = TridiagonalOperator(op.diagonal[:-1].copy(), op.off_diagonal[:-1].copy())
        mu = eig_full(sub).eigenvalues
        tol = 1e-10 * norm
        assert np.all(w[:-1] <= mu + tol) and np.all(mu <= w[1:] + tol)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.floats(0.5, 40), st.floats(-3, 3))
def test_parity_at_zero_imbalance(n, coupling, charging):
    op = build_hamiltonian(JunctionParams(0.0, coupling, charging, SpinBasis(n)))
    spec = eig_full(op)
    w = spec.eigenvalues
    norm = op.norm_inf()
    for k in range(op.dim):
        if np.sum(np.abs(w - w[k]) <= 1e-6 * norm) > 1:
            continue
        v = spec.vectors[:, k]
        assert min(np.max(np.abs(v - v[::-1])), np.max(np.abs(v + v[::-1]))) <= 1e-8


def test_gap_scan_degeneracy_onset():
    base = JunctionParams(0.0, 0.0, -2.0, SpinBasis(20))
    grid = [40 - 0.5 * i for i in range(81)]
    rows = gap_scan(base, grid, k=6)
    assert rows[0].coupling == 40.0 and rows[-1].coupling == 0.0
    assert rows[-1].gap01 == 0.0 and rows[-1].eigenvalues[:2] == (-100.0, -100.0)
    assert rows[0].gap01 > 1
    gaps = [r.gap01 for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
    assert all(len(r.eigenvalues) == 6 for r in rows)


def test_gap_scan_order_independent_of_threads():
    base = JunctionParams(0.5, 0.0, -2.0, SpinBasis(20))
    grid = np.linspace(0, 40, 17)
    assert gap_scan(base, grid, workers=1) == gap_scan(base, grid, workers=4)
    assert gap_scan(base, [0.0])[0].gap01 > 0.5


def test_gap_scan_rejects_empty_grid():
    with pytest.raises(ValueError):
        gap_scan(JunctionParams(0.0, 0.0, -2.0, SpinBasis(4)), [])


def test_ground_state_examples():
    b = SpinBasis(20)
    g = ground_state(JunctionParams(0.0, 40.0, -2.0, b))
    assert fidelity(g, coherent_state(b, math.pi / 2, 0.0)) > 0.9
    g = ground_state(JunctionParams(0.5, 0.0, -2.0, b))
    assert fidelity(g, basis_state(b, -10)) == 1.0
    b2 = SpinBasis(2)
    g = ground_state(JunctionParams(0.0, 1.3, 0.0, b2))
    assert np.allclose(g.amplitudes, coherent_state(b2, math.pi / 2, 0.0).amplitudes, atol=1e-14)


def test_ground_state_warns_on_degeneracy():
    with pytest.warns(RuntimeWarning):
        ground_state(JunctionParams(0.0, 0.0, -2.0, SpinBasis(20)))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ground_state(JunctionParams(0.0, 40.0, -2.0, SpinBasis(20)))
