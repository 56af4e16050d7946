import math

import numpy as np
import pytest
from scipy.linalg import expm

from bjjmz.evolution import (Schedule, convergence_check, evolve, make_linear_ramp,
                             propagate_array)
from bjjmz.hamiltonian import JunctionParams, build_hamiltonian
from bjjmz.metrology import noon_max_fidelity
from bjjmz.spectral import ground_state
from bjjmz.spin import SpinBasis, StateVector, coherent_state, fidelity


def constant(basis, delta, coupling, charging, duration=1.0):
    return make_linear_ramp(0.0, duration, (delta, coupling), (delta, coupling), charging, basis)


def splitter(n=20, delta=0.0, duration=40.0):
    return make_linear_ramp(0.0, duration, (delta, 40.0), (delta, 0.0), -2.0, SpinBasis(n))


def expm_reference(psi, schedule, substeps):
    """Midpoint exponential integrator; independent of the Cayley kernel."""
    psi = np.array(psi, dtype=complex)
    h = schedule.duration / substeps
    for i in range(substeps):
        p = schedule.params_at(schedule.t_start + (i + 0.5) * h)
        psi = expm(-1j * h * build_hamiltonian(p).to_dense()) @ psi
    return psi


def test_schedule_validation():
    b = SpinBasis(2)
    with pytest.raises(ValueError):
        make_linear_ramp(1.0, 1.0, (0, 0), (0, 1), -1.0, b)
    with pytest.raises(ValueError):
        Schedule(((0, 0, 0),), -1.0, b)
    with pytest.raises(ValueError):
        Schedule(((0, 0, 0), (1, 0, 0), (0.5, 0, 0)), -1.0, b)
    s = make_linear_ramp(0.0, 40.0, (0.1, 40.0), (0.1, 0.0), -2.0, b)
    assert s.at(10.0) == pytest.approx((0.1, 30.0))
    r = s.reversed()
    assert r.at(10.0) == pytest.approx((0.1, 10.0))
    assert r.t_start == 0.0 and r.t_end == 40.0


def test_stationary_eigenstate():
    b = SpinBasis(20)
    s0 = coherent_state(b, math.pi / 2, 0.0)
    traj = evolve(s0, constant(b, 0.0, 3.0, 0.0, 5.0), dt=0.01, sample_every=50)
    assert fidelity(traj.final_state, s0) == pytest.approx(1.0, abs=1e-12)
    assert traj.column("f0").min() == pytest.approx(1.0, abs=1e-12)


def test_constant_hamiltonian_against_closed_form():
    b = SpinBasis(2)
    p = JunctionParams(0.3, 1.1, -0.7, b)
    h = build_hamiltonian(p).to_dense()
    w, v = np.linalg.eigh(h)
    psi0 = np.array([0.6, 0.0, 0.8j])
    exact = v @ (np.exp(-1j * w * 2.0) * (v.T @ psi0))
    errs = []
    for dt in (0.1, 0.05, 0.025, 0.0125):
        out = propagate_array(psi0, constant(b, 0.3, 1.1, -0.7, 2.0), dt)
        errs.append(np.linalg.norm(out - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2.0) < 0.05)


def test_ramp_matches_exponential_integrator():
    b = SpinBasis(6)
    sched = Schedule(((0.0, 0.2, 6.0), (1.5, -0.1, 1.0), (3.0, 0.0, 0.0)), -2.0, b)
    psi0 = ground_state(sched.params_at(0.0)).amplitudes
    ours = propagate_array(psi0, sched, 1e-3)
    ref = expm_reference(psi0, sched, 3000)
    # both are second-order midpoint rules; their difference is O(dt^2)
    assert np.linalg.norm(ours - ref) < 1e-5


def test_norm_and_subspace_on_splitter():
    b = SpinBasis(20)
    sched = splitter()
    traj = evolve(ground_state(sched.params_at(0.0)), sched, dt=1e-3, sample_every=100)
    assert len(traj.samples) == 401
    assert traj.samples[0].t == 0.0 and traj.samples[-1].t == 40.0
    assert traj.max_norm_drift <= 1e-9
    assert traj.min_subspace_population >= 0.99
    f0, f1 = traj.column("f0"), traj.column("f1")
    assert np.all(f0 >= 0) and np.all(f1 >= 0) and np.all(f0 + f1 <= 1 + 1e-9)
    assert noon_max_fidelity(traj.final_state).fidelity >= 0.98


def test_norm_preserved_at_coarse_step():
    sched = splitter(n=12)
    psi0 = ground_state(sched.params_at(0.0))
    out = propagate_array(psi0.amplitudes, sched, 0.5)
    assert abs(np.linalg.norm(out) - 1) <= 1e-9


def test_time_reversal():
    sched = splitter()
    psi0 = ground_state(sched.params_at(0.0))
    fwd = propagate_array(psi0.amplitudes, sched, 1e-3)
    back = np.conj(propagate_array(np.conj(fwd), sched.reversed(), 1e-3))
    assert abs(np.vdot(psi0.amplitudes, back)) ** 2 >= 1 - 1e-6


def test_linearity():
    b = SpinBasis(10)
    sched = splitter(n=10, duration=5.0)
    rng = np.random.default_rng(5)
    x = rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim)
    y = rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim)
    a, c = 0.3 - 1.2j, 2.0 + 0.5j
    lhs = propagate_array(a * x + c * y, sched, 0.01)
    rhs = a * propagate_array(x, sched, 0.01) + c * propagate_array(y, sched, 0.01)
    assert np.max(np.abs(lhs - rhs)) <= 1e-8


def test_input_validation():
    b = SpinBasis(4)
    sched = constant(b, 0.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        evolve(np.ones(b.dim), sched, 0.01)
    s = coherent_state(b, 1.0, 0.0)
    for bad in (0.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            evolve(s, sched, bad)
    with pytest.raises(ValueError):
        evolve(coherent_state(SpinBasis(3), 1.0, 0.0), sched, 0.01)
    with pytest.raises(ValueError):
        propagate_array(np.ones(3), sched, 0.01)


def test_convergence_order_default_step():
    sched = splitter()
    rep = convergence_check(ground_state(sched.params_at(0.0)), sched, 1e-3)
    assert 1.7 <= rep.observed_order <= 2.3
    assert rep.error_dt > rep.error_dt_half


def test_convergence_check_at_reference_resolution():
    b = SpinBasis(2)
    s = coherent_state(b, math.pi / 2, 0.0)
    with pytest.raises(ValueError):
        convergence_check(s, constant(b, 0.0, 1.0, 0.0), 0.01)
