"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--n 20] [--steps 40000] [--repeat 3]
"""

import argparse
import importlib
import time

import numpy as np

from bjjmz import _kernels_py
from bjjmz.evolution import _kernel_arrays, make_linear_ramp
from bjjmz.hamiltonian import JunctionParams, build_hamiltonian
from bjjmz.spectral import ground_state
from bjjmz.spin import SpinBasis


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cayley_case(kernels, n, steps):
    b = SpinBasis(n)
    sched = make_linear_ramp(0.0, 40.0, (0.0, 40.0), (0.0, 0.0), -2.0, b)
    arrays = _kernel_arrays(sched)
    psi0 = ground_state(sched.params_at(0.0)).amplitudes

    def run():
        psi = np.array(psi0, dtype=complex)
        kernels.cayley_propagate(psi, b.m_values, b.ladder(), -2.0, *arrays, 0.0, 40.0 / steps, steps)
    return run


def tql2_case(kernels, n):
    op = build_hamiltonian(JunctionParams(0.1, 20.0, -2.0, SpinBasis(n)))

    def run():
        d = op.diagonal.copy()
        e = np.zeros(op.dim)
        e[:-1] = op.off_diagonal
        kernels.tql2(d, e, np.eye(op.dim))
    return run


def bisect_case(kernels, n):
    op = build_hamiltonian(JunctionParams(0.1, 20.0, -2.0, SpinBasis(n)))
    e = np.zeros(op.dim)
    e[:-1] = op.off_diagonal

    def run():
        kernels.bisect_lowest(op.diagonal.copy(), e, 2)
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--steps", type=int, default=40_000)
    ap.add_argument("--eig-n", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        compiled = importlib.import_module("bjjmz._kernels")
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the fallback only")

    cases = [
        (f"cayley_propagate N={args.n} steps={args.steps}",
         lambda k: cayley_case(k, args.n, args.steps)),
        (f"tql2 dim={args.eig_n + 1}", lambda k: tql2_case(k, args.eig_n)),
        (f"bisect_lowest k=2 dim={args.eig_n + 1}", lambda k: bisect_case(k, args.eig_n)),
    ]
    print(f"{'kernel':<40} {'python [s]':>12} {'cython [s]':>12} {'speedup':>9}")
    for label, make in cases:
        t_py = best_of(make(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{label:<40} {t_py:12.4f} {'-':>12} {'-':>9}")
            continue
        t_cy = best_of(make(compiled), args.repeat)
        print(f"{label:<40} {t_py:12.4f} {t_cy:12.4f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
