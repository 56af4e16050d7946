import importlib

import numpy as np
import pytest

from bjjmz import _kernels_py as py
from bjjmz.backend import BACKEND
from bjjmz.evolution import _kernel_arrays, make_linear_ramp
from bjjmz.hamiltonian import JunctionParams, build_hamiltonian
from bjjmz.spectral import ground_state
from bjjmz.spin import SpinBasis

try:
    cy = importlib.import_module("bjjmz._kernels")
except ImportError:
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def test_backend_name():
    assert BACKEND in ("cython", "python")


@needs_ext
def test_cayley_bit_identical():
    b = SpinBasis(12)
    sched = make_linear_ramp(0.0, 2.0, (0.1, 20.0), (0.1, 0.0), -2.0, b)
    psi0 = ground_state(sched.params_at(0.0)).amplitudes
    out = []
    for k in (py, cy):
        psi = np.array(psi0, dtype=complex)
        k.cayley_propagate(psi, b.m_values, b.ladder(), -2.0, *_kernel_arrays(sched), 0.0, 0.01, 200)
        out.append(psi)
    assert np.max(np.abs(out[0] - out[1])) <= 1e-14


def _tridiag(n, seed):
    rng = np.random.default_rng(seed)
    p = JunctionParams(rng.uniform(-1, 1), rng.uniform(0, 40), rng.uniform(-3, 3), SpinBasis(n))
    return build_hamiltonian(p)


@needs_ext
@pytest.mark.parametrize("n", [1, 5, 30])
def test_tql2_and_bisection_agree(n):
    op = _tridiag(n, n)
    res = []
    for k in (py, cy):
        d = op.diagonal.copy()
        e = np.zeros(op.dim)
        e[:-1] = op.off_diagonal
        z = np.eye(op.dim)
        k.tql2(d, e, z)
        e2 = np.zeros(op.dim)
        e2[:-1] = op.off_diagonal
        w = k.bisect_lowest(op.diagonal.copy(), e2, min(3, op.dim))
        res.append((np.sort(d), w, k.sturm_count(op.diagonal.copy(), e2, 0.0)))
    assert np.allclose(res[0][0], res[1][0], atol=1e-12)
    assert np.allclose(res[0][1], res[1][1], atol=1e-12)
    assert res[0][2] == res[1][2]


@needs_ext
def test_shifted_solve_agrees():
    op = _tridiag(15, 3)
    e = np.zeros(op.dim)
    e[:-1] = op.off_diagonal
    rhs = np.random.default_rng(0).normal(size=op.dim)
    xs = []
    for k in (py, cy):
        x = rhs.copy()
        k.shifted_solve(op.diagonal.copy(), e, 0.37, x, 1e-300)
        xs.append(x)
    assert np.allclose(xs[0], xs[1], rtol=1e-12, atol=0)
    a = op.to_dense() - 0.37 * np.eye(op.dim)
    assert np.allclose(a @ xs[0], rhs, atol=1e-9)


def test_python_fallback_selected_by_env(monkeypatch):
    import bjjmz.backend as backend

    monkeypatch.setenv("BJJ_BACKEND", "python")
    reloaded = importlib.reload(backend)
    try:
        assert reloaded.BACKEND == "python"
        assert reloaded.kernels is py
    finally:
        monkeypatch.delenv("BJJ_BACKEND")
        importlib.reload(backend)


def test_pure_python_pipeline_in_subprocess():
    import subprocess
    import sys

    code = ("from bjjmz import BACKEND; from bjjmz.protocol import ProtocolConfig, full_mz;"
            "r = full_mz(ProtocolConfig(n_particles=6, ramp_duration=40, dt=0.01), 0.0);"
            "print(BACKEND, r.f0)")
    env = dict(__import__("os").environ, BJJ_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, f0 = out.stdout.split()
    assert name == "python" and float(f0) >= 0.98
