# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: cyclic tridiagonal solves.

The semi-implicit steppers solve one periodically wrapped tridiagonal system
per time step. Row j reads

    a[j] x[j-1] + b[j] x[j] + c[j] x[j+1] = r[j]   (indices mod m)

so the matrix has corner entries A[0, m-1] = a[0] and A[m-1, 0] = c[m-1].
The corners are removed by a rank-one (Sherman-Morrison) correction, leaving
two strictly tridiagonal Thomas sweeps. No pivoting: the calling schemes
produce diagonally dominant rows away from blow-up, and a vanishing pivot is
reported instead of silently propagated.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF PIVOT_FLOOR = 1e-300


cdef int _thomas_d(double[::1] a, double[::1] b, double[::1] c,
                   double[::1] r, double[::1] x,
                   double[::1] cp, double[::1] dp) nogil:
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i
    cdef double den = b[0]
    if den < PIVOT_FLOOR and den > -PIVOT_FLOOR:
        return 1
    cp[0] = c[0] / den
    dp[0] = r[0] / den
    for i in range(1, m):
        den = b[i] - a[i] * cp[i - 1]
        if den < PIVOT_FLOOR and den > -PIVOT_FLOOR:
            return 1
        cp[i] = c[i] / den
        dp[i] = (r[i] - a[i] * dp[i - 1]) / den
    x[m - 1] = dp[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return 0


cdef int _thomas_z(double[::1] a, double[::1] b, double[::1] c,
                   double complex[::1] r, double complex[::1] x,
                   double[::1] cp, double complex[::1] dp) nogil:
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i
    cdef double den = b[0]
    if den < PIVOT_FLOOR and den > -PIVOT_FLOOR:
        return 1
    cp[0] = c[0] / den
    dp[0] = r[0] / den
    for i in range(1, m):
        den = b[i] - a[i] * cp[i - 1]
        if den < PIVOT_FLOOR and den > -PIVOT_FLOOR:
            return 1
        cp[i] = c[i] / den
        dp[i] = (r[i] - a[i] * dp[i - 1]) / den
    x[m - 1] = dp[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return 0


def solve_cyclic_d(double[::1] a, double[::1] b, double[::1] c, double[::1] r):
    """Solve the periodic tridiagonal system with real right-hand side."""
    cdef Py_ssize_t m = b.shape[0]
    cdef double gamma = -b[0]
    cdef double alpha = a[0]
    cdef double beta = c[m - 1]
    bb = np.asarray(b).copy()
    cdef double[::1] bbv = bb
    bbv[0] = b[0] - gamma
    bbv[m - 1] = b[m - 1] - alpha * beta / gamma

    u = np.zeros(m)
    cdef double[::1] uv = u
    uv[0] = gamma
    uv[m - 1] = beta

    y = np.empty(m)
    z = np.empty(m)
    cp = np.empty(m)
    dp = np.empty(m)
    cdef int bad = 0
    bad |= _thomas_d(a, bbv, c, r, y, cp, dp)
    bad |= _thomas_d(a, bbv, c, uv, z, cp, dp)
    if bad:
        raise ZeroDivisionError("vanishing pivot in cyclic tridiagonal solve")
    cdef double fac = alpha / gamma
    cdef double vy = y[0] + fac * y[m - 1]
    cdef double vz = 1.0 + z[0] + fac * z[m - 1]
    if vz < PIVOT_FLOOR and vz > -PIVOT_FLOOR:
        raise ZeroDivisionError("vanishing pivot in cyclic tridiagonal solve")
    out = np.asarray(y)
    cdef double[::1] outv = out
    cdef double[::1] zv = z
    cdef double scale = vy / vz
    cdef Py_ssize_t i
    for i in range(m):
        outv[i] = outv[i] - scale * zv[i]
    return out


def solve_cyclic_z(double[::1] a, double[::1] b, double[::1] c,
                   double complex[::1] r):
    """Solve the periodic tridiagonal system (real matrix, complex rhs)."""
    cdef Py_ssize_t m = b.shape[0]
    cdef double gamma = -b[0]
    cdef double alpha = a[0]
    cdef double beta = c[m - 1]
    bb = np.asarray(b).copy()
    cdef double[::1] bbv = bb
    bbv[0] = b[0] - gamma
    bbv[m - 1] = b[m - 1] - alpha * beta / gamma

    u = np.zeros(m)
    cdef double[::1] uv = u
    uv[0] = gamma
    uv[m - 1] = beta

    y = np.empty(m, dtype=np.complex128)
    z = np.empty(m)
    cp = np.empty(m)
    dpz = np.empty(m, dtype=np.complex128)
    dpd = np.empty(m)
    cdef int bad = 0
    bad |= _thomas_z(a, bbv, c, r, y, cp, dpz)
    bad |= _thomas_d(a, bbv, c, uv, z, cp, dpd)
    if bad:
        raise ZeroDivisionError("vanishing pivot in cyclic tridiagonal solve")
    cdef double fac = alpha / gamma
    cdef double complex vy = y[0] + fac * y[m - 1]
    cdef double vz = 1.0 + z[0] + fac * z[m - 1]
    if vz < PIVOT_FLOOR and vz > -PIVOT_FLOOR:
        raise ZeroDivisionError("vanishing pivot in cyclic tridiagonal solve")
    out = np.asarray(y)
    cdef double complex[::1] outv = out
    cdef double[::1] zv = z
    cdef double complex scale = vy / vz
    cdef Py_ssize_t i
    for i in range(m):
        outv[i] = outv[i] - scale * zv[i]
    return out
