"""One-dimensional orthonormal wavelet systems.

A system is a conjugate-quadrature filter pair plus dyadic samples of the
scaling function and the wavelet.  Filters are indexed so that both
functions are supported on ``1/2 + m * (-1/2, 1/2)`` with ``m = L - 1`` for
a length-``L`` filter: the first tap carries the integer index
``offset = -(L/2 - 1)``.

Samples come from the eigenvector initialization at integer points (the
refinement relation restricted to integers has a simple eigenvalue 1)
followed by exact dyadic refinement, so every two-scale identity holds at
the lattice points to floating precision.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, RangeParameterError
from .fields import GridFunction

__all__ = [
    "FilterBank",
    "WaveletSystem",
    "haar_system",
    "daubechies_system",
    "cascade_sample",
    "moment_integral",
]

SQRT2 = math.sqrt(2.0)
ORTHONORMALITY_TOL = 1e-10
DEFAULT_CASCADE_K = 10

# Floor of the Hoelder regularity exponent of the order-p family; order-1
# derivative checks need at least 1 here.
_SMOOTHNESS_FLOOR = {1: 0, 2: 0, 3: 1, 4: 1, 5: 1, 6: 2, 7: 2, 8: 2, 9: 3,
                     10: 3}


class FilterBank:
    """Orthonormal two-channel filter pair.

    ``lowpass`` holds the taps h[0..L-1]; the highpass is the alternating
    flip g[i] = (-1)**i * h[L-1-i].  ``offset`` is the integer index of the
    first tap, shared by both channels.
    """

    __slots__ = ("lowpass", "highpass", "offset")

    def __init__(self, lowpass, offset=0, check=True):
        h = np.asarray(lowpass, dtype=float).copy()
        if h.ndim != 1 or h.size < 2 or h.size % 2:
            raise RangeParameterError("filter length must be even and >= 2")
        L = h.size
        g = np.array([(-1.0) ** i * h[L - 1 - i] for i in range(L)])
        h.flags.writeable = False
        g.flags.writeable = False
        self.lowpass = h
        self.highpass = g
        self.offset = int(offset)
        if check:
            res = self.orthonormality_residual()
            if res > ORTHONORMALITY_TOL:
                raise RangeParameterError(
                    f"filter fails orthonormality by {res:.2e}")

    @property
    def length(self):
        return self.lowpass.size

    def sum_residual(self):
        return abs(float(self.lowpass.sum()) - SQRT2)

    def orthonormality_residual(self):
        """Worst deviation of sum_k h_k h_{k+2m} from delta_{m,0}, including
        the tap-sum normalization."""
        h = self.lowpass
        worst = self.sum_residual()
        for m in range(h.size // 2):
            val = float(np.dot(h[2 * m:], h[:h.size - 2 * m]))
            worst = max(worst, abs(val - (1.0 if m == 0 else 0.0)))
        return worst

    def save_taps(self, path):
        """Plain-text export: offset on the first line, one tap per line."""
        with open(path, "w") as fh:
            fh.write(f"{self.offset}\n")
            for tap in self.lowpass:
                fh.write(f"{float(tap)!r}\n")

    @classmethod
    def load_taps(cls, path):
        with open(path) as fh:
            lines = [line.strip() for line in fh if line.strip()]
        return cls([float(x) for x in lines[1:]], offset=int(lines[0]))


def _daubechies_lowpass(p):
    """Length-2p orthonormal lowpass with p filter vanishing moments."""
    if p == 1:
        return np.array([1.0, 1.0]) / SQRT2
    if p == 2:
        s3 = math.sqrt(3.0)
        return np.array([1.0 + s3, 3.0 + s3, 3.0 - s3, 1.0 - s3]) / (4 * SQRT2)
    # Spectral factorization: roots of P(y) = sum_k C(p-1+k, k) y^k are
    # mapped to the z plane via z + 1/z = 2 - 4y, keeping the root inside
    # the unit circle; the minimal-phase factor times (1+z)^p gives the
    # taps.  A Newton polish then pins the orthonormality and moment
    # equations to machine precision.
    coeffs = [float(math.comb(p - 1 + k, k)) for k in range(p)]
    yroots = np.roots(np.array(coeffs[::-1]))
    zroots = []
    for y in yroots:
        b = 2.0 - 4.0 * y
        disc = np.sqrt(b * b - 4.0 + 0j)
        z1, z2 = (b + disc) / 2.0, (b - disc) / 2.0
        zroots.append(z1 if abs(z1) < 1.0 else z2)
    h = np.real(np.poly([-1.0 + 0j] * p + zroots))
    h *= SQRT2 / h.sum()
    return _polish_lowpass(h, p)


def _polish_lowpass(h, p):
    """Newton refinement of the orthonormality + moment equations.

    Unknowns: 2p taps.  Equations: sum h = sqrt(2); sum_k h_k h_{k+2m} =
    delta_{m,0} for m = 0..p-1; sum_k (-1)^k k^l h_k = 0 for l = 1..p-1.
    """
    L = h.size
    idx = np.arange(L, dtype=float)
    signs = (-1.0) ** np.arange(L)

    def residual(h):
        rows = [h.sum() - SQRT2]
        for m in range(p):
            rows.append(float(np.dot(h[2 * m:], h[:L - 2 * m]))
                        - (1.0 if m == 0 else 0.0))
        for l in range(1, p):
            rows.append(float(np.sum(signs * idx ** l * h)))
        return np.array(rows)

    def jacobian(h):
        rows = [np.ones(L)]
        for m in range(p):
            row = np.zeros(L)
            row[2 * m:] += h[:L - 2 * m]
            row[:L - 2 * m] += h[2 * m:]
            rows.append(row)
        for l in range(1, p):
            rows.append(signs * idx ** l)
        return np.array(rows)

    best = h
    for _ in range(60):
        r = residual(best)
        if np.max(np.abs(r)) < 1e-15:
            break
        best = best - np.linalg.lstsq(jacobian(best), r, rcond=None)[0]
    return best


def _refine_one_level(vals, h, level):
    """One exact dyadic refinement step of scaling samples.

    ``vals`` holds phi on the inclusive lattice o + i * 2**-level; returns
    the inclusive lattice at level + 1.
    """
    L = h.size
    step = 2 ** level
    n1 = (L - 1) * 2 * step + 1
    new = np.zeros(n1)
    new[::2] = vals
    odd = np.arange(1, n1, 2)
    for t in range(L):
        src = odd - t * step
        ok = (src >= 0) & (src < vals.size)
        new[odd[ok]] += SQRT2 * h[t] * vals[src[ok]]
    return new


def cascade_sample(bank: FilterBank, K: int):
    """Samples of the scaling function and the wavelet at step 2**-K.

    Integer-point values solve the eigenvalue-1 problem of the downsampled
    filter matrix; dyadic refinement then fills each finer lattice exactly.
    Returns two GridFunctions on the support box [o, o + L - 1] with the
    left-closed lattice convention; the scaling function integrates to 1.
    """
    K = int(K)
    if not 1 <= K <= 16:
        raise RangeParameterError("cascade resolution K must lie in [1, 16]")
    h = bank.lowpass
    g = bank.highpass
    L = h.size
    o = bank.offset
    if L == 2:
        # Indicator pair on [0, 1): no interior integer points, sample
        # directly.
        npts = 2 ** K
        phi = np.ones(npts)
        psi = np.ones(npts)
        psi[npts // 2:] = -1.0
        return (GridFunction((float(o),), K, phi),
                GridFunction((float(o),), K, psi))

    # Values at the interior integers of [o, o + L - 1]; the refinement
    # relation phi(n) = sqrt(2) sum_t h[t] phi(2n - (t + o)) closes on them.
    interior = np.arange(o + 1, o + L - 1)
    M = np.zeros((interior.size, interior.size))
    for r, x in enumerate(interior):
        for c, mm in enumerate(interior):
            t_true = 2 * x - mm
            if o <= t_true <= o + L - 1:
                M[r, c] = SQRT2 * h[t_true - o]
    eigvals, eigvecs = np.linalg.eig(M)
    pick = int(np.argmin(np.abs(eigvals - 1.0)))
    if abs(eigvals[pick] - 1.0) > 1e-8:
        raise ConvergenceError("refinement matrix has no eigenvalue 1")
    v = np.real(eigvecs[:, pick])
    ssum = v.sum()
    if abs(ssum) < 1e-12:
        raise ConvergenceError("degenerate integer-point eigenvector")
    v = v / ssum  # partition of unity at the integers

    vals = np.zeros(L)  # inclusive lattice at level 0, zero endpoints
    vals[1:-1] = v
    for level in range(K):
        vals = _refine_one_level(vals, h, level)

    coarse = vals[::2]  # level K-1, used for the wavelet relation
    step = 2 ** (K - 1)
    npts = (L - 1) * 2 ** K
    psi = np.zeros(npts)
    pts = np.arange(npts)
    for t in range(L):
        src = pts - t * step
        ok = (src >= 0) & (src < coarse.size)
        psi[pts[ok]] += SQRT2 * g[t] * coarse[src[ok]]

    phi_gf = GridFunction((float(o),), K, vals[:-1])
    psi_gf = GridFunction((float(o),), K, psi)
    _check_two_scale(phi_gf, bank)
    return phi_gf, psi_gf


def _check_two_scale(phi: GridFunction, bank: FilterBank):
    """Verify phi(x) = sqrt(2) sum h_t phi(2x - t) on a lattice subsample;
    failures indicate a degenerate refinement matrix."""
    h = bank.lowpass
    vals = phi.values
    size = vals.size
    step = 2 ** phi.K
    stride = max(1, size // 2048)
    pts = np.arange(0, size, stride)
    recon = np.zeros(pts.size)
    for t in range(h.size):
        src = 2 * pts - t * step
        ok = (src >= 0) & (src < size)
        recon[ok] += SQRT2 * h[t] * vals[src[ok]]
    worst = float(np.max(np.abs(vals[pts] - recon)))
    if worst > 1e-8 * max(1.0, float(np.max(np.abs(vals)))):
        raise ConvergenceError(
            f"two-scale residual {worst:.2e} after refinement")


def moment_integral(samples: GridFunction, l: int) -> float:
    """Lattice quadrature of integral x**l f(x) dx for 1D samples."""
    if samples.n != 1:
        raise RangeParameterError("moment integrals are one-dimensional")
    if l < 0:
        raise RangeParameterError("moment order must be nonnegative")
    x = samples.axis_coords(0)
    return float(np.sum(x ** l * samples.values) * samples.h)


class WaveletSystem:
    """A 1D orthonormal system: filter pair, smoothness/support metadata,
    and cached dyadic samples of the two generators.

    Immutable after construction; the internal caches are append-only and
    safe for shared reads.
    """

    def __init__(self, bank: FilterBank, smoothness: int,
                 support_radius: float, moments: int,
                 K_cascade: int = DEFAULT_CASCADE_K, name: str = ""):
        self.bank = bank
        self.smoothness = int(smoothness)
        self.support_radius = float(support_radius)
        self.moments = int(moments)
        self.K_cascade = int(K_cascade)
        self.name = name or f"L{bank.length}"
        self.phi_samples, self.psi_samples = cascade_sample(bank, K_cascade)
        self._base_cache = {}
        self._product_cache = {}

    @property
    def m(self):
        return self.support_radius

    def evaluate(self, kind: str, x):
        """Pointwise evaluation of phi or psi from the cascade samples.

        Left-continuous piecewise-constant for the indicator system, linear
        interpolation otherwise; zero outside the support box.
        """
        gf = self.phi_samples if kind == "phi" else self.psi_samples
        x = np.atleast_1d(np.asarray(x, dtype=float))
        pos = (x - gf.lo[0]) / gf.h
        vals = gf.values
        out = np.zeros(x.shape)
        if self.bank.length == 2:
            idx = np.floor(pos).astype(int)
            ok = (idx >= 0) & (idx < vals.size)
            out[ok] = vals[idx[ok]]
        else:
            idx = np.floor(pos).astype(int)
            frac = pos - idx
            ok = (idx >= 0) & (idx < vals.size - 1)
            out[ok] = vals[idx[ok]] * (1 - frac[ok]) \
                + vals[idx[ok] + 1] * frac[ok]
            edge = idx == vals.size - 1
            out[edge] = vals[-1] * (1 - frac[edge])
        return out if out.size > 1 else float(out[0])

    def samples_to_csv(self, path, kind="psi"):
        gf = self.phi_samples if kind == "phi" else self.psi_samples
        x = gf.axis_coords(0)
        with open(path, "w") as fh:
            fh.write("x,value\n")
            for xi, vi in zip(x, gf.values):
                fh.write(f"{float(xi)!r},{float(vi)!r}\n")


def haar_system(K_cascade: int = DEFAULT_CASCADE_K) -> WaveletSystem:
    """The piecewise-constant system: indicator scaling function on [0, 1)
    and the +1/-1 square wave; support radius 1, one vanishing moment."""
    bank = FilterBank([1.0 / SQRT2, 1.0 / SQRT2], offset=0)
    return WaveletSystem(bank, smoothness=0, support_radius=1.0, moments=1,
                         K_cascade=K_cascade, name="haar")


def daubechies_system(p: int,
                      K_cascade: int = DEFAULT_CASCADE_K) -> WaveletSystem:
    """Compactly supported orthonormal system of order p: length-2p filter,
    p vanishing moments, support radius 2p - 1, support centered at 1/2."""
    if not 1 <= p <= 10:
        raise RangeParameterError(f"order p={p} outside supported range 1..10")
    h = _daubechies_lowpass(p)
    bank = FilterBank(h, offset=-(p - 1))
    return WaveletSystem(bank, smoothness=_SMOOTHNESS_FLOOR[p],
                         support_radius=2.0 * p - 1.0, moments=p,
                         K_cascade=K_cascade, name=f"db{p}")
