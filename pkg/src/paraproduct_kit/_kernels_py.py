"""Pure-numpy implementations of the hot kernels.

Drop-in equivalents of ``_kernels_cy``; selected at import time by
``backend``.  Accumulation order matches the compiled versions tap by tap so
both backends produce bit-identical floats.
"""

import numpy as np


def axpy_window_1d(out, start, coeff, w):
    out[start:start + w.shape[0]] += coeff * w


def axpy_window_2d(out, s0, s1, coeff, w0, w1):
    out[s0:s0 + w0.shape[0], s1:s1 + w1.shape[0]] += np.outer(coeff * w0, w1)


def axpy_window_3d(out, s0, s1, s2, coeff, w0, w1, w2):
    block = coeff * w0[:, None, None] * w1[None, :, None] * w2[None, None, :]
    out[s0:s0 + w0.shape[0], s1:s1 + w1.shape[0], s2:s2 + w2.shape[0]] += block


def add_box_1d(out, s0, n0, coeff):
    out[s0:s0 + n0] += coeff


def add_box_2d(out, s0, n0, s1, n1, coeff):
    out[s0:s0 + n0, s1:s1 + n1] += coeff


def add_box_3d(out, s0, n0, s1, n1, s2, n2, coeff):
    out[s0:s0 + n0, s1:s1 + n1, s2:s2 + n2] += coeff


def down_batch(xp, taps, ny):
    """y[b, k] = sum_i taps[i] * xp[b, 2k + i] for k < ny."""
    B = xp.shape[0]
    y = np.zeros((B, ny))
    for i in range(taps.shape[0]):
        y += taps[i] * xp[:, i:i + 2 * ny:2]
    return y


def up_batch(c, taps):
    """out[b, 2k + i] += taps[i] * c[b, k]; out width 2*(nc-1) + len(taps)."""
    B, nc = c.shape
    L = taps.shape[0]
    out = np.zeros((B, 2 * (nc - 1) + L))
    for i in range(L):
        out[:, i:i + 2 * nc:2] += taps[i] * c
    return out
