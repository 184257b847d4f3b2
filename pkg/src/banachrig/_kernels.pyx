"""Compiled kernels; see ``_kernels_py`` for the reference semantics."""
import math

import numpy as np

from libc.math cimport fabs, pow, sqrt, INFINITY, isinf


cpdef double conjugate(double p):
    if p == 1.0:
        return INFINITY
    if isinf(p):
        return 1.0
    return p / (p - 1.0)


cdef double _lp(const double[::1] x, double p) noexcept nogil:
    cdef Py_ssize_t k, n = x.shape[0]
    cdef double scale = 0.0, s = 0.0, a
    for k in range(n):
        a = fabs(x[k])
        if a > scale:
            scale = a
    if scale == 0.0 or isinf(p):
        return scale
    if p == 1.0:
        for k in range(n):
            s += fabs(x[k])
        return s
    if p == 2.0:
        for k in range(n):
            a = x[k] / scale
            s += a * a
        return scale * sqrt(s)
    for k in range(n):
        s += pow(fabs(x[k]) / scale, p)
    return scale * pow(s, 1.0 / p)


cdef void _preimage(const double[::1] c, double p, double[::1] out) noexcept nogil:
    cdef Py_ssize_t k, n = c.shape[0], kmax = 0
    cdef double scale = 0.0, a, q, nrm
    for k in range(n):
        out[k] = 0.0
        a = fabs(c[k])
        if a > scale:
            scale = a
            kmax = k
    if scale == 0.0:
        return
    if p == 1.0:
        out[kmax] = 1.0 if c[kmax] > 0 else -1.0
        return
    if isinf(p):
        for k in range(n):
            out[k] = -1.0 if c[k] < 0 else 1.0
        return
    q = p / (p - 1.0)
    for k in range(n):
        a = pow(fabs(c[k]) / scale, q - 1.0)
        out[k] = -a if c[k] < 0 else a
    nrm = _lp(out, p)
    for k in range(n):
        out[k] /= nrm


def lp_norm(x, double p):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    return _lp(xv, p)


def dual_preimage(c, double p):
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64).ravel()
    out = np.zeros(cv.shape[0])
    cdef double[::1] ov = out
    _preimage(cv, p, ov)
    return out


def power_ascent(A, double p_in, double p_out, x0, int maxiter=200, double tol=1e-13):
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1], i, j
    x_arr = np.array(x0, dtype=np.float64).ravel()
    cdef double[::1] x = x_arr
    cdef double nx = _lp(x, p_in)
    if nx == 0.0:
        return 0.0, x_arr, 0
    best_arr = np.empty(n)
    cdef double[::1] xbest = best_arr
    cdef double[::1] y = np.empty(m)
    cdef double[::1] z = np.empty(m)
    cdef double[::1] g = np.empty(n)
    cdef double[::1] xn = np.empty(n)
    cdef double q_out = conjugate(p_out)
    cdef double best = -1.0, prev = -1.0, val, s
    cdef int it = 0
    cdef bint nonzero
    with nogil:
        for j in range(n):
            x[j] /= nx
            xbest[j] = x[j]
        while it < maxiter:
            it += 1
            for i in range(m):
                s = 0.0
                for j in range(n):
                    s += a[i, j] * x[j]
                y[i] = s
            val = _lp(y, p_out)
            if val > best:
                best = val
                for j in range(n):
                    xbest[j] = x[j]
            if val <= prev * (1.0 + tol):
                break
            prev = val
            _preimage(y, q_out, z)
            for j in range(n):
                s = 0.0
                for i in range(m):
                    s += a[i, j] * z[i]
                g[j] = s
            _preimage(g, p_in, xn)
            nonzero = False
            for j in range(n):
                if xn[j] != 0.0:
                    nonzero = True
            if not nonzero:
                break
            for j in range(n):
                x[j] = xn[j]
    return max(best, 0.0), best_arr, it
