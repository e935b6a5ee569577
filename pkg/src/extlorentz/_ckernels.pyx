# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contracts as ``_pykernels``."""
import numpy as np

from libc.math cimport isfinite


def riemann(g, dg):
    cdef double complex[:, :, ::1] G = np.ascontiguousarray(g, dtype=np.complex128)
    cdef double complex[:, :, :, ::1] D = np.ascontiguousarray(dg, dtype=np.complex128)
    out = np.empty((4, 4, 4, 4), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] R = out
    cdef int i, j, k, l, m
    cdef double complex acc
    for i in range(4):
        for j in range(4):
            for k in range(4):
                R[i, j, k, k] = 0
                for l in range(k + 1, 4):
                    acc = D[k, i, l, j] - D[l, i, k, j]
                    for m in range(4):
                        acc = acc + G[m, l, j] * G[i, k, m] - G[m, k, j] * G[i, l, m]
                    R[i, j, k, l] = acc
                    R[i, j, l, k] = -acc
    return out


cdef inline void _accel(double[:, :, ::1] Q, double* u, double* out) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(4):
        acc = 0.0
        for j in range(4):
            for k in range(4):
                acc = acc + Q[i, j, k] * u[j] * u[k]
        out[i] = -acc


def geodesic_accel(gre, u):
    cdef double[:, :, ::1] Q = np.ascontiguousarray(gre, dtype=np.float64)
    cdef double uu[4]
    cdef double res[4]
    cdef int i
    for i in range(4):
        uu[i] = u[i]
    _accel(Q, uu, res)
    return np.array([res[0], res[1], res[2], res[3]])


cdef inline void _deriv(double[:, :, ::1] Q, double* y, double* f) noexcept nogil:
    cdef int i
    for i in range(4):
        f[i] = y[4 + i]
    _accel(Q, &y[4], &f[4])


def rk4_uniform(gre, y0, hs):
    cdef double[:, :, ::1] Q = np.ascontiguousarray(gre, dtype=np.float64)
    cdef double[::1] H = np.ascontiguousarray(hs, dtype=np.float64)
    cdef Py_ssize_t n = H.shape[0]
    ys_arr = np.zeros((n + 1, 8))
    cdef double[:, ::1] ys = ys_arr
    cdef double y[8]
    cdef double tmp[8]
    cdef double k1[8]
    cdef double k2[8]
    cdef double k3[8]
    cdef double k4[8]
    cdef double h
    cdef Py_ssize_t step
    cdef int i
    for i in range(8):
        y[i] = y0[i]
        ys[0, i] = y[i]
    if not y[4] > 0.0:
        return ys_arr, 0
    with nogil:
        for step in range(n):
            h = H[step]
            _deriv(Q, y, k1)
            for i in range(8):
                tmp[i] = y[i] + 0.5 * h * k1[i]
            _deriv(Q, tmp, k2)
            for i in range(8):
                tmp[i] = y[i] + 0.5 * h * k2[i]
            _deriv(Q, tmp, k3)
            for i in range(8):
                tmp[i] = y[i] + h * k3[i]
            _deriv(Q, tmp, k4)
            for i in range(8):
                y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                ys[step + 1, i] = y[i]
            for i in range(8):
                if not isfinite(y[i]):
                    with gil:
                        return ys_arr, step + 1
            if not y[4] > 0.0:
                with gil:
                    return ys_arr, step + 1
    return ys_arr, n + 1
