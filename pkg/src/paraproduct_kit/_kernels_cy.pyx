# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: windowed multiply-add accumulation and the
two-channel filter-bank steps.  Semantics and floating-point accumulation
order match ``_kernels_py`` exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def axpy_window_1d(double[::1] out, Py_ssize_t start, double coeff,
                   const double[::1] w):
    cdef Py_ssize_t i, n = w.shape[0]
    for i in range(n):
        out[start + i] += coeff * w[i]


def axpy_window_2d(double[:, ::1] out, Py_ssize_t s0, Py_ssize_t s1,
                   double coeff, const double[::1] w0, const double[::1] w1):
    cdef Py_ssize_t i, j, n0 = w0.shape[0], n1 = w1.shape[0]
    cdef double c0
    for i in range(n0):
        c0 = coeff * w0[i]
        for j in range(n1):
            out[s0 + i, s1 + j] += c0 * w1[j]


def axpy_window_3d(double[:, :, ::1] out, Py_ssize_t s0, Py_ssize_t s1,
                   Py_ssize_t s2, double coeff, const double[::1] w0,
                   const double[::1] w1, const double[::1] w2):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n0 = w0.shape[0], n1 = w1.shape[0], n2 = w2.shape[0]
    cdef double c0, c1
    for i in range(n0):
        c0 = coeff * w0[i]
        for j in range(n1):
            c1 = c0 * w1[j]
            for k in range(n2):
                out[s0 + i, s1 + j, s2 + k] += c1 * w2[k]


def add_box_1d(double[::1] out, Py_ssize_t s0, Py_ssize_t n0, double coeff):
    cdef Py_ssize_t i
    for i in range(n0):
        out[s0 + i] += coeff


def add_box_2d(double[:, ::1] out, Py_ssize_t s0, Py_ssize_t n0,
               Py_ssize_t s1, Py_ssize_t n1, double coeff):
    cdef Py_ssize_t i, j
    for i in range(n0):
        for j in range(n1):
            out[s0 + i, s1 + j] += coeff


def add_box_3d(double[:, :, ::1] out, Py_ssize_t s0, Py_ssize_t n0,
               Py_ssize_t s1, Py_ssize_t n1, Py_ssize_t s2, Py_ssize_t n2,
               double coeff):
    cdef Py_ssize_t i, j, k
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                out[s0 + i, s1 + j, s2 + k] += coeff


def down_batch(const double[:, ::1] xp, const double[::1] taps, Py_ssize_t ny):
    cdef Py_ssize_t B = xp.shape[0], L = taps.shape[0]
    cdef cnp.ndarray[double, ndim=2] y = np.zeros((B, ny))
    cdef double[:, ::1] yv = y
    cdef Py_ssize_t b, k, i
    cdef double t
    # Tap-major accumulation to mirror the numpy fallback bit for bit.
    for i in range(L):
        t = taps[i]
        for b in range(B):
            for k in range(ny):
                yv[b, k] += t * xp[b, 2 * k + i]
    return y


def up_batch(const double[:, ::1] c, const double[::1] taps):
    cdef Py_ssize_t B = c.shape[0], nc = c.shape[1], L = taps.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((B, 2 * (nc - 1) + L))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t b, k, i
    cdef double t
    for i in range(L):
        t = taps[i]
        for b in range(B):
            for k in range(nc):
                ov[b, 2 * k + i] += t * c[b, k]
    return out
