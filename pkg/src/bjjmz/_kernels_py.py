"""Pure-Python reference implementations of the numerical kernels.

Every function here has a typed twin in ``_kernels.pyx`` with the same
signature and semantics.  The compiled module is preferred at import time
(see :mod:`bjjmz.backend`); this one is used when the extension is not
built or when ``BJJ_BACKEND=python`` is set.
"""

import math

import numpy as np

from .errors import ConvergenceError

EPS = np.finfo(float).eps


def _interp_index(bp_t, t, j):
    # advance monotonically; t only grows inside one propagate call
    last = len(bp_t) - 2
    while j < last and t > bp_t[j + 1]:
        j += 1
    return j


def cayley_propagate(psi, m, ladder, charging, bp_t, bp_delta, bp_coupling, bp_shift,
                     t0, dt, nsteps):
    """Advance ``psi`` in place by ``nsteps`` Cayley steps of size ``dt``.

    The Hamiltonian ``delta*M + charging/2*M**2 - coupling*Jx`` is evaluated
    at each step midpoint with (delta, coupling, shift) linearly interpolated
    on the breakpoints ``bp_t``.  Steps use ``H - shift`` and the omitted
    phase ``exp(-i sum(shift*dt))`` is restored at the end.
    """
    n = len(m)
    mm = [float(v) for v in m]
    lad = [float(v) for v in ladder]
    bt = [float(v) for v in bp_t]
    bd = [float(v) for v in bp_delta]
    bc = [float(v) for v in bp_coupling]
    bs = [float(v) for v in bp_shift]
    x = [complex(v) for v in psi]
    half = 0.5 * dt
    quad = [0.5 * charging * v * v for v in mm]
    cp = [0j] * n
    y = [0j] * n
    j = 0
    phase = 0.0
    for s in range(nsteps):
        t = t0 + (s + 0.5) * dt
        j = _interp_index(bt, t, j)
        span = bt[j + 1] - bt[j]
        w = (t - bt[j]) / span
        if w < 0.0:
            w = 0.0
        elif w > 1.0:
            w = 1.0
        delta = bd[j] + w * (bd[j + 1] - bd[j])
        coupling = bc[j] + w * (bc[j + 1] - bc[j])
        shift = bs[j] + w * (bs[j + 1] - bs[j])
        phase += shift * dt

        h = [delta * mm[i] + quad[i] - shift for i in range(n)]
        off = [-0.5 * coupling * lad[i] for i in range(n - 1)]

        # rhs = (1 - i dt/2 H) x
        rhs = [0j] * n
        for i in range(n):
            acc = h[i] * x[i]
            if i > 0:
                acc += off[i - 1] * x[i - 1]
            if i < n - 1:
                acc += off[i] * x[i + 1]
            rhs[i] = x[i] - 1j * half * acc

        # (1 + i dt/2 H) has identity Hermitian part, so elimination
        # without pivoting is stable
        diag0 = 1.0 + 1j * half * h[0]
        if n > 1:
            cp[0] = (1j * half * off[0]) / diag0
        y[0] = rhs[0] / diag0
        for i in range(1, n):
            b = 1j * half * off[i - 1]
            den = 1.0 + 1j * half * h[i] - b * cp[i - 1]
            if i < n - 1:
                cp[i] = (1j * half * off[i]) / den
            y[i] = (rhs[i] - b * y[i - 1]) / den
        x[n - 1] = y[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = y[i] - cp[i] * x[i + 1]

    rot = complex(math.cos(phase), -math.sin(phase))
    psi[:] = [v * rot for v in x]


def tql2(d, e, z, max_iter=60):
    """Implicit-shift QL on a symmetric tridiagonal matrix, in place.

    ``d`` holds the diagonal, ``e[i]`` couples ``i`` and ``i+1`` (``e`` has
    length ``n``; the last slot is scratch).  On return ``d`` holds the
    unsorted eigenvalues and the columns of ``z`` have been rotated by the
    accumulated transformation.
    """
    n = d.shape[0]
    if n == 1:
        return
    e[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceError(f"QL iteration did not converge for index {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * col
                z[:, i] = c * z[:, i] - s * col
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def _pivmin(e):
    emax2 = float(np.max(e * e)) if e.shape[0] else 0.0
    return 1e-300 * max(1.0, emax2)


def sturm_count(d, e, x):
    """Number of eigenvalues strictly below ``x``."""
    n = d.shape[0]
    pivmin = _pivmin(e[: n - 1])
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e[i - 1] * e[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


def bisect_lowest(d, e, k):
    """The ``k`` lowest eigenvalues by Sturm-sequence bisection, ascending."""
    n = d.shape[0]
    off = np.abs(e[: n - 1])
    radius = np.zeros(n)
    radius[: n - 1] += off
    radius[1:] += off
    lo0 = float(np.min(d - radius))
    hi0 = float(np.max(d + radius))
    scale = max(abs(lo0), abs(hi0), 1e-300)
    lo0 -= 2.0 * EPS * scale * n
    hi0 += 2.0 * EPS * scale * n
    out = np.empty(k)
    lo_prev = lo0
    for j in range(k):
        lo, hi = lo_prev, hi0
        for _ in range(200):
            if hi - lo <= 2.0 * EPS * max(abs(lo), abs(hi)) + EPS * scale:
                break
            mid = 0.5 * (lo + hi)
            if sturm_count(d, e, mid) > j:
                hi = mid
            else:
                lo = mid
        out[j] = 0.5 * (lo + hi)
        lo_prev = lo
    return out


def shifted_solve(d, e, shift, b, tiny):
    """Solve ``(T - shift*I) x = b`` in place in ``b`` (partial pivoting).

    Zero pivots are replaced by ``tiny`` so that the routine is usable for
    inverse iteration at an eigenvalue.
    """
    n = d.shape[0]
    dg = [float(d[i]) - shift for i in range(n)]
    du = [float(e[i]) for i in range(n - 1)] + [0.0]
    dl = [float(e[i]) for i in range(n - 1)] + [0.0]
    du2 = [0.0] * n
    x = [float(v) for v in b]
    for i in range(n - 1):
        if abs(dg[i]) >= abs(dl[i]):
            if dg[i] == 0.0:
                dg[i] = tiny
            fact = dl[i] / dg[i]
            dg[i + 1] -= fact * du[i]
            x[i + 1] -= fact * x[i]
        else:
            fact = dg[i] / dl[i]
            dg[i] = dl[i]
            temp = dg[i + 1]
            dg[i + 1] = du[i] - fact * temp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du2[i]
            du[i] = temp
            temp = x[i]
            x[i] = x[i + 1]
            x[i + 1] = temp - fact * x[i + 1]
    if dg[n - 1] == 0.0:
        dg[n - 1] = tiny
    x[n - 1] /= dg[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dg[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dg[i]
    b[:] = x
