"""Norm functionals on grids and coefficient fields.

Covers the weighted Lebesgue quadrature norms, the square-function sequence
norm that serves as the Hardy-space diagnostic, the Carleson aggregation
over the dyadic tree, pointwise Hoelder quotients, dyadic mean oscillation,
and a dictionary lower bound for the grand maximal function.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .backend import add_box_1d, add_box_2d, add_box_3d
from .errors import CapabilityError, GeometryError, RangeParameterError
from .fields import CoeffField, GridFunction

__all__ = [
    "Exponents",
    "Weight",
    "lp_norm",
    "sequence_hardy_norm",
    "carleson_norm",
    "lipschitz_norm",
    "lipschitz_plus_norm",
    "bmo_alpha_norm",
    "grand_maximal_function",
    "grand_maximal_norm",
    "norm_report",
]


@dataclass(frozen=True)
class Exponents:
    """Integrability p in (n/(n+1), 1) with the matching smoothness
    alpha = n(1/p - 1) in (0, 1)."""

    p: float
    n: int

    def __post_init__(self):
        if not self.n / (self.n + 1.0) < self.p < 1.0:
            raise RangeParameterError(
                f"p={self.p} outside (n/(n+1), 1) for n={self.n}")

    @property
    def alpha(self) -> float:
        return self.n * (1.0 / self.p - 1.0)

    @property
    def moment_order(self) -> int:
        return int(math.floor(self.alpha))


class Weight:
    """Radial decay weight (1 + |x|)**-gamma, defaulting to the critical
    exponent gamma = n(1 - p); values lie in (0, 1]."""

    def __init__(self, n: int, p: float, gamma=None):
        self.n = int(n)
        self.p = float(p)
        self.gamma = float(gamma) if gamma is not None else n * (1.0 - p)
        if self.gamma < 0:
            raise RangeParameterError("weight exponent must be nonnegative")

    def __call__(self, *coords):
        r2 = np.zeros(np.broadcast(*coords).shape) if len(coords) > 1 \
            else np.zeros(np.asarray(coords[0]).shape)
        for c in coords:
            r2 = r2 + np.asarray(c, dtype=float) ** 2
        return (1.0 + np.sqrt(r2)) ** (-self.gamma)

    def on_grid(self, f: GridFunction):
        return self(*f.meshgrid()) if f.n > 1 else self(f.axis_coords(0))


def lp_norm(f: GridFunction, p: float, weight: Weight | None = None) -> float:
    """Quadrature value of the (weighted) p-th power lattice norm."""
    if p <= 0:
        raise RangeParameterError("p must be positive")
    absf = np.abs(f.values) ** p
    if weight is not None:
        absf = absf * weight.on_grid(f)
    return float(np.sum(absf) * f.h ** f.n) ** (1.0 / p)


# ---------------------------------------------------------------------------
# square function / sequence norm


def _square_function_values(c: CoeffField, lo_idx, shape, K):
    n = c.n
    out = np.zeros(shape)
    adders = {1: add_box_1d, 2: add_box_2d, 3: add_box_3d}
    if n not in adders:
        raise CapabilityError("square function supports dimensions 1..3")
    for (j, k, _lam), v in c.sorted_wavelet_items():
        if v == 0.0:
            continue
        rel = K - j
        if rel < 0:
            raise GeometryError("grid coarser than the finest scale")
        height = v * v * 2.0 ** (j * n)  # (|c| |I|^{-1/2})^2 on the cube
        starts = []
        lens = []
        skip = False
        for a in range(n):
            s = k[a] * (1 << rel) - lo_idx[a]
            e = s + (1 << rel)
            s_cl = max(s, 0)
            e_cl = min(e, shape[a])
            if e_cl <= s_cl:
                skip = True
                break
            starts.append(s_cl)
            lens.append(e_cl - s_cl)
        if skip:
            continue
        if n == 1:
            adders[1](out, starts[0], lens[0], height)
        elif n == 2:
            adders[2](out, starts[0], lens[0], starts[1], lens[1], height)
        else:
            adders[3](out, starts[0], lens[0], starts[1], lens[1], starts[2],
                      lens[2], height)
    return np.sqrt(out)


def square_function(c: CoeffField, K: int | None = None,
                    frame=None) -> GridFunction:
    """Pointwise square function of the detail coefficients: the root of
    sum over entries of (|value| |I|^{-1/2} indicator_I)^2, rasterized
    exactly on a lattice at least as fine as the finest scale."""
    K = int(K) if K is not None else c.j_max
    if frame is None:
        if c.box is not None:
            lo_idx = tuple(int(math.floor(b[0] * 2.0 ** K)) for b in c.box)
            shape = tuple(int(math.ceil(b[1] * 2.0 ** K)) - l
                          for b, l in zip(c.box, lo_idx))
        elif c.wavelet:
            lo = [min(key[1][a] * 2.0 ** -key[0] for key in c.wavelet)
                  for a in range(c.n)]
            hi = [max((key[1][a] + 1) * 2.0 ** -key[0] for key in c.wavelet)
                  for a in range(c.n)]
            lo_idx = tuple(int(math.floor(x * 2.0 ** K)) for x in lo)
            shape = tuple(int(math.ceil(x * 2.0 ** K)) - l
                          for x, l in zip(hi, lo_idx))
        else:
            raise GeometryError("empty field needs a frame or a box")
    else:
        lo_idx, shape = frame
    values = _square_function_values(c, lo_idx, shape, K)
    return GridFunction.from_start_index(lo_idx, K, values)


def sequence_hardy_norm(c: CoeffField, p: float,
                        weight: Weight | None = None,
                        K: int | None = None) -> float:
    """Lattice norm of the square function: the sequence-space diagnostic
    for the p-integrability class of the expansion (weighted variant when a
    weight is supplied)."""
    if not c.wavelet:
        return 0.0
    return lp_norm(square_function(c, K=K), p, weight)


# ---------------------------------------------------------------------------
# Carleson aggregation


def carleson_norm(c: CoeffField, alpha: float) -> float:
    """Exact supremum over dyadic cubes I of
    (|I|^{-(2 alpha / n + 1)} * sum of squared entries on cubes inside I)
    ** (1/2), by bottom-up aggregation of the dyadic tree.

    Ascending past the coarsest entry scale cannot raise the supremum: a
    merge multiplies the cube volume by 2**n while at best doubling the
    aggregated sum, and the aggregation exponent exceeds 1 for alpha >= 0.
    The loop therefore stops once every entry scale has been absorbed."""
    if alpha < 0.0:
        raise RangeParameterError("alpha must be nonnegative")
    if not c.wavelet:
        return 0.0
    n = c.n
    expo = 2.0 * alpha / n + 1.0
    levels = {}
    for (j, k, _lam), v in c.wavelet.items():
        levels.setdefault(j, {})
        levels[j][k] = levels[j].get(k, 0.0) + v * v
    best = 0.0
    j = max(levels)
    j_stop = min(levels)
    cur: dict = {}
    while True:
        for k, s in levels.get(j, {}).items():
            cur[k] = cur.get(k, 0.0) + s
        vol = 2.0 ** (-j * n)
        for s in cur.values():
            best = max(best, (s / vol ** expo) ** 0.5)
        if j <= j_stop:
            break
        parent: dict = {}
        for k, s in cur.items():
            kp = tuple(x >> 1 for x in k)
            parent[kp] = parent.get(kp, 0.0) + s
        cur = parent
        j -= 1
    return best


# ---------------------------------------------------------------------------
# Hoelder quotients


def lipschitz_norm(f: GridFunction, alpha: float,
                   homogeneous: bool = True,
                   near_cells: int = 32, far_stride: int = 2) -> float:
    """Supremum of |f(x) - f(y)| / |x - y|**alpha over lattice pairs.

    Pairs within ``near_cells`` lattice steps are scanned exactly; beyond
    that both endpoints and displacements come from the stride-subsampled
    lattice (the quotient decays with distance once the sup-norm cap takes
    over, so near pairs dominate).  The inhomogeneous variant adds the
    sup norm."""
    if not 0.0 < alpha <= 1.0:
        raise RangeParameterError("alpha must lie in (0, 1]")
    v = f.values
    h = f.h
    best = 0.0
    if f.n == 1:
        N = v.size
        half = N // 2
        for lag in range(1, half + 1):
            if lag <= near_cells:
                diff = np.max(np.abs(v[lag:] - v[:-lag]))
            elif lag % far_stride == 0:
                diff = np.max(np.abs(v[lag::far_stride]
                                     - v[:-lag:far_stride]))
            else:
                continue
            best = max(best, diff / (lag * h) ** alpha)
    elif f.n == 2:
        s = far_stride
        sub = v[::s, ::s]
        n0, n1 = v.shape
        half0, half1 = n0 // 2, n1 // 2
        for d0 in range(0, half0 + 1):
            for d1 in range(-half1, half1 + 1):
                if d0 == 0 and d1 <= 0:
                    continue
                dist = math.hypot(d0 * h, d1 * h)
                if max(abs(d0), abs(d1)) <= near_cells:
                    diff = _lag_diff(v, d0, d1)
                elif d0 % s == 0 and d1 % s == 0:
                    diff = _lag_diff(sub, d0 // s, d1 // s)
                else:
                    continue
                if diff is not None:
                    best = max(best, diff / dist ** alpha)
    else:
        raise CapabilityError("Hoelder quotients support dimensions 1 and 2")
    if not homogeneous:
        best += float(np.max(np.abs(v)))
    return float(best)


def _lag_diff(v, d0, d1):
    n0, n1 = v.shape
    if d0 >= n0 or abs(d1) >= n1:
        return None
    if d1 >= 0:
        a = v[d0:, d1:]
        b = v[:n0 - d0, :n1 - d1]
    else:
        a = v[d0:, :n1 + d1]
        b = v[:n0 - d0, -d1:]
    if a.size == 0:
        return None
    return float(np.max(np.abs(a - b)))


def lipschitz_plus_norm(f: GridFunction, alpha: float, **kw) -> float:
    """Hoelder seminorm augmented by the value at the box anchor (the lower
    corner sample), which pins the constants ambiguity."""
    anchor = float(f.values[(0,) * f.n])
    return lipschitz_norm(f, alpha, **kw) + abs(anchor)


# ---------------------------------------------------------------------------
# dyadic mean oscillation


def bmo_alpha_norm(f: GridFunction, alpha: float, q: float = 1.0,
                   j_min: int | None = None) -> float:
    """Supremum over dyadic cubes inside the box of
    (|I|^{-(1 + alpha/n)} * integral over I of |f - mean_I|^q) ** (1/q).

    Dyadic cubes stand in for balls; the equivalence constants are absorbed
    into reported brackets."""
    if q < 1.0:
        raise RangeParameterError("q must be at least 1")
    n = f.n
    K = f.K
    start = f.start_index()
    j_hi = K  # single-sample cubes have zero oscillation, stop before
    if j_min is None:
        j_min = K - int(math.floor(math.log2(min(f.shape)))) if min(f.shape) \
            else K
    best = 0.0
    for j in range(j_min, j_hi):
        b = 1 << (K - j)  # samples per cube side
        if any(s % b for s in f.shape) or any(st % b for st in start):
            continue
        blocks = f.values
        # reshape into per-cube blocks along every axis
        shape = []
        for s in f.shape:
            shape.extend([s // b, b])
        perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        blk = blocks.reshape(shape).transpose(perm)
        flat = blk.reshape((-1, b ** n))
        means = flat.mean(axis=1)
        osc = np.abs(flat - means[:, None]) ** q
        cell_int = osc.mean(axis=1) * 2.0 ** (-j * n)  # integral over I
        vol = 2.0 ** (-j * n)
        vals = (cell_int / vol ** (1.0 + alpha / n)) ** (1.0 / q)
        best = max(best, float(vals.max()))
    return best


# ---------------------------------------------------------------------------
# grand maximal function (dictionary lower bound)


def _bump_profiles(n: int, count: int, grid: int = 129):
    """Deterministic dictionary of compactly supported test profiles:
    smooth bump times low-order polynomials at two support radii."""
    xs = np.linspace(-1.0, 1.0, grid)
    mesh = np.meshgrid(*([xs] * n), indexing="ij")
    r2 = sum(m ** 2 for m in mesh)
    with np.errstate(divide="ignore", over="ignore"):
        bump = np.where(r2 < 1.0, np.exp(-1.0 / np.maximum(1.0 - r2, 1e-300)),
                        0.0)
    polys = [np.ones_like(bump)]
    for a in range(n):
        polys.append(mesh[a])
    polys.append(1.0 - r2)
    for a in range(n):
        polys.append(mesh[a] ** 2)
    profiles = []
    radii = (1.0, 0.5)
    i = 0
    while len(profiles) < count:
        poly = polys[i % len(polys)]
        radius = radii[(i // len(polys)) % len(radii)]
        if radius != 1.0:
            scaled_r2 = r2 / radius ** 2
            with np.errstate(divide="ignore", over="ignore"):
                base = np.where(
                    scaled_r2 < 1.0,
                    np.exp(-1.0 / np.maximum(1.0 - scaled_r2, 1e-300)), 0.0)
        else:
            base = bump
        profiles.append(base * poly)
        i += 1
    return xs, profiles


def _seminorm_bound(xs, profile, n, m_reg: int):
    """Numerical value of the admissibility seminorm: the sup over the grid
    and derivative orders <= m_reg + 1 of (1+|x|)^{(m_reg+2)(n+1)} |d f|.

    A 10% safety margin keeps the normalized profile admissible despite
    the finite-difference underestimate of the derivative sup, so the
    maximal estimate stays a genuine lower bound."""
    hstep = xs[1] - xs[0]
    mesh = np.meshgrid(*([xs] * n), indexing="ij")
    r = np.sqrt(sum(m ** 2 for m in mesh))
    envelope = (1.0 + r) ** ((m_reg + 2) * (n + 1))
    worst = float(np.max(envelope * np.abs(profile)))
    for order in range(1, m_reg + 2):
        for gamma in itertools.product(range(order + 1), repeat=n):
            if sum(gamma) != order:
                continue
            d = profile
            for axis, o in enumerate(gamma):
                for _ in range(o):
                    d = np.gradient(d, hstep, axis=axis)
            worst = max(worst, float(np.max(envelope * np.abs(d))))
    return 1.1 * worst


def grand_maximal_function(f: GridFunction, dictionary_size: int = 8,
                           m_reg: int = 1, t_values=None) -> GridFunction:
    """Lower-bound estimate of the non-tangential grand maximal function.

    Maximizes |f * profile_t(y)| over a finite dictionary of admissible
    profiles (normalized against the regularity seminorm), dyadic dilation
    values t, and cone points |y - x| < t.  Enlarging the dictionary can
    only increase the estimate."""
    n = f.n
    if n > 2:
        raise CapabilityError("maximal estimates support dimensions 1 and 2")
    h = f.h
    side = min(b - a for a, b in zip(f.lo, f.hi))
    if t_values is None:
        t_lo = max(4 * h, 2.0 ** -f.K * 4)
        t_values = []
        t = t_lo
        while t <= side / 2:
            t_values.append(t)
            t *= 2.0
    xs, profiles = _bump_profiles(n, dictionary_size)
    out = np.zeros(f.shape)
    for profile in profiles:
        bound = _seminorm_bound(xs, profile, n, m_reg)
        if bound <= 0:
            continue
        unit = profile / bound
        for t in t_values:
            # sample profile_t on the f lattice: t^-n * unit(x / t)
            half = int(math.floor(t / h))
            if half < 1:
                continue
            coords = np.arange(-half, half + 1) * (h / t)
            pos = (coords + 1.0) / (xs[1] - xs[0])
            idx = np.clip(np.floor(pos).astype(int), 0, xs.size - 2)
            frac = pos - idx
            if n == 1:
                ker = unit[idx] * (1 - frac) + unit[idx + 1] * frac
                ker = ker / t ** n
            else:
                k1 = unit[idx][:, idx] * np.outer(1 - frac, 1 - frac) \
                    + unit[idx][:, idx + 1] * np.outer(1 - frac, frac) \
                    + unit[idx + 1][:, idx] * np.outer(frac, 1 - frac) \
                    + unit[idx + 1][:, idx + 1] * np.outer(frac, frac)
                ker = k1 / t ** n
            conv = signal.fftconvolve(f.values, ker, mode="same") * h ** n
            rad = max(int(math.floor(t / h)) - 1, 0)
            if rad > 0:
                if n == 1:
                    swept = ndimage.maximum_filter1d(np.abs(conv), 2 * rad + 1)
                else:
                    yy, xx = np.ogrid[-rad:rad + 1, -rad:rad + 1]
                    footprint = yy ** 2 + xx ** 2 <= rad ** 2
                    swept = ndimage.maximum_filter(np.abs(conv),
                                                   footprint=footprint)
            else:
                swept = np.abs(conv)
            np.maximum(out, swept, out=out)
    return GridFunction(f.lo, f.K, out)


def grand_maximal_norm(f, p: float, weight: Weight | None = None,
                       dictionary_size: int = 8, system=None, K=None,
                       frame=None, **kw) -> float:
    """Weighted p-norm of the grand maximal estimate.  Accepts a grid
    function, or a coefficient field together with its system."""
    if isinstance(f, CoeffField):
        if system is None:
            raise GeometryError("coefficient input needs the system")
        from .transform import synthesize

        if K is None:
            K = f.j_max + 2
        lo = shape = None
        if frame is not None:
            lo, shape = frame
        f = synthesize(f, system, K, lo=lo, shape=shape)
    star = grand_maximal_function(f, dictionary_size=dictionary_size, **kw)
    return lp_norm(star, p, weight)


def norm_report(name: str, value: float, params: dict,
                tolerances: dict | None = None) -> str:
    """JSON norm report with deterministic key order."""
    return json.dumps({
        "norm": name,
        "value": value,
        "params": params,
        "tolerances": tolerances or {},
    }, sort_keys=True)
