# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels; see ``_kernels_py.py`` for the reference."""

from libc.math cimport fabs, hypot, copysign, cos, sin
from libc.stdlib cimport malloc, free

import numpy as np

from .errors import ConvergenceError

cdef double EPS = np.finfo(float).eps



def cayley_propagate(double complex[::1] psi, const double[::1] m,
                     const double[::1] ladder, double charging,
                     const double[::1] bp_t, const double[::1] bp_delta,
                     const double[::1] bp_coupling, const double[::1] bp_shift,
                     double t0, double dt,
                     Py_ssize_t nsteps):
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t last = bp_t.shape[0] - 2
    cdef Py_ssize_t i, s, j = 0
    cdef double half = 0.5 * dt
    cdef double t, w, delta, coupling, span, shift
    cdef double phase = 0.0
    cdef double complex rot
    cdef double complex b, den, acc
    cdef double complex ihalf = 1j * half
    cdef double *quad
    cdef double *h
    cdef double *off
    cdef double complex *rhs
    cdef double complex *cp
    cdef double complex *y

    quad = <double *> malloc(n * sizeof(double))
    h = <double *> malloc(n * sizeof(double))
    off = <double *> malloc(n * sizeof(double))
    rhs = <double complex *> malloc(n * sizeof(double complex))
    cp = <double complex *> malloc(n * sizeof(double complex))
    y = <double complex *> malloc(n * sizeof(double complex))
    if not (quad and h and off and rhs and cp and y):
        free(quad); free(h); free(off); free(rhs); free(cp); free(y)
        raise MemoryError()

    with nogil:
        for i in range(n):
            quad[i] = 0.5 * charging * m[i] * m[i]
        for s in range(nsteps):
            t = t0 + (s + 0.5) * dt
            while j < last and t > bp_t[j + 1]:
                j += 1
            span = bp_t[j + 1] - bp_t[j]
            w = (t - bp_t[j]) / span
            if w < 0.0:
                w = 0.0
            elif w > 1.0:
                w = 1.0
            delta = bp_delta[j] + w * (bp_delta[j + 1] - bp_delta[j])
            coupling = bp_coupling[j] + w * (bp_coupling[j + 1] - bp_coupling[j])
            shift = bp_shift[j] + w * (bp_shift[j + 1] - bp_shift[j])
            phase += shift * dt

            for i in range(n):
                h[i] = delta * m[i] + quad[i] - shift
            for i in range(n - 1):
                off[i] = -0.5 * coupling * ladder[i]

            for i in range(n):
                acc = h[i] * psi[i]
                if i > 0:
                    acc = acc + off[i - 1] * psi[i - 1]
                if i < n - 1:
                    acc = acc + off[i] * psi[i + 1]
                rhs[i] = psi[i] - ihalf * acc

            den = 1.0 + ihalf * h[0]
            if n > 1:
                cp[0] = ihalf * off[0] / den
            y[0] = rhs[0] / den
            for i in range(1, n):
                b = ihalf * off[i - 1]
                den = 1.0 + ihalf * h[i] - b * cp[i - 1]
                if i < n - 1:
                    cp[i] = ihalf * off[i] / den
                y[i] = (rhs[i] - b * y[i - 1]) / den
            psi[n - 1] = y[n - 1]
            for i in range(n - 2, -1, -1):
                psi[i] = y[i] - cp[i] * psi[i + 1]

        rot = cos(phase) - 1j * sin(phase)
        for i in range(n):
            psi[i] = psi[i] * rot

    free(quad); free(h); free(off); free(rhs); free(cp); free(y)


def tql2(double[::1] d, double[::1] e, double[:, ::1] z, int max_iter=60):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t l, m, i, k
    cdef int it, underflow
    cdef double dd, g, r, s, c, p, f, b, col
    if n == 1:
        return
    e[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceError(f"QL iteration did not converge for index {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = 0
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = 1
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    col = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * col
                    z[k, i] = c * z[k, i] - s * col
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


cdef double _pivmin(const double[::1] e, Py_ssize_t n) nogil:
    cdef double emax2 = 0.0
    cdef Py_ssize_t i
    for i in range(n - 1):
        if e[i] * e[i] > emax2:
            emax2 = e[i] * e[i]
    if emax2 < 1.0:
        emax2 = 1.0
    return 1e-300 * emax2


cdef Py_ssize_t _sturm(const double[::1] d, const double[::1] e, double x,
                       double pivmin) nogil:
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, count = 0
    cdef double q = d[0] - x
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e[i - 1] * e[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


def sturm_count(const double[::1] d, const double[::1] e, double x):
    return _sturm(d, e, x, _pivmin(e, d.shape[0]))


def bisect_lowest(const double[::1] d, const double[::1] e, Py_ssize_t k):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, it
    cdef double lo0, hi0, lo, hi, mid, lo_prev, scale, r, pivmin
    out_arr = np.empty(k)
    cdef double[::1] out = out_arr
    with nogil:
        pivmin = _pivmin(e, n)
        lo0 = 1e308
        hi0 = -1e308
        for i in range(n):
            r = 0.0
            if i > 0:
                r += fabs(e[i - 1])
            if i < n - 1:
                r += fabs(e[i])
            if d[i] - r < lo0:
                lo0 = d[i] - r
            if d[i] + r > hi0:
                hi0 = d[i] + r
        scale = fabs(lo0)
        if fabs(hi0) > scale:
            scale = fabs(hi0)
        if scale < 1e-300:
            scale = 1e-300
        lo0 -= 2.0 * EPS * scale * n
        hi0 += 2.0 * EPS * scale * n
        lo_prev = lo0
        for j in range(k):
            lo = lo_prev
            hi = hi0
            for it in range(200):
                if hi - lo <= 2.0 * EPS * (fabs(lo) if fabs(lo) > fabs(hi) else fabs(hi)) + EPS * scale:
                    break
                mid = 0.5 * (lo + hi)
                if _sturm(d, e, mid, pivmin) > j:
                    hi = mid
                else:
                    lo = mid
            out[j] = 0.5 * (lo + hi)
            lo_prev = lo
    return out_arr


def shifted_solve(const double[::1] d, const double[::1] e, double shift,
                  double[::1] b, double tiny):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i
    cdef double fact, temp
    dg_arr = np.asarray(d, dtype=float) - shift
    du_arr = np.zeros(n)
    dl_arr = np.zeros(n)
    du2_arr = np.zeros(n)
    cdef double[::1] dg = dg_arr
    cdef double[::1] du = du_arr
    cdef double[::1] dl = dl_arr
    cdef double[::1] du2 = du2_arr
    for i in range(n - 1):
        du[i] = e[i]
        dl[i] = e[i]
    for i in range(n - 1):
        if fabs(dg[i]) >= fabs(dl[i]):
            if dg[i] == 0.0:
                dg[i] = tiny
            fact = dl[i] / dg[i]
            dg[i + 1] -= fact * du[i]
            b[i + 1] -= fact * b[i]
        else:
            fact = dg[i] / dl[i]
            dg[i] = dl[i]
            temp = dg[i + 1]
            dg[i + 1] = du[i] - fact * temp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du2[i]
            du[i] = temp
            temp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = temp - fact * b[i + 1]
    if dg[n - 1] == 0.0:
        dg[n - 1] = tiny
    b[n - 1] /= dg[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dg[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dg[i]
