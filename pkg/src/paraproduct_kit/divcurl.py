"""Spectral Riesz transforms, structured vector fields, and the div-curl
experiment.

The spectral side lives on a periodic box; the wavelet side of the
experiment works on a smoothly windowed, zero-extended restriction, since
the transforms need global Fourier structure while the product split needs
compact supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (CapabilityError, DomainError, GeometryError,
                     PreconditionError, RangeParameterError)
from .fields import DyadicCube, GridFunction
from .norms import Weight, lipschitz_norm, sequence_hardy_norm
from .paraproducts import renormalize
from .transform import analyze
from .wavelets import WaveletSystem

__all__ = [
    "VectorField",
    "AlmostDiagonalEntry",
    "almost_diagonal_weight",
    "riesz_apply",
    "curl_free_field",
    "div_free_field",
    "helmholtz_project",
    "div_curl_experiment",
    "cutoff_window",
]


def _freq_grids(f: GridFunction):
    axes = [2.0 * math.pi * np.fft.fftfreq(s, d=f.h) for s in f.shape]
    return np.meshgrid(*axes, indexing="ij")


def _apply_multiplier(f: GridFunction, mult) -> GridFunction:
    spec = np.fft.fftn(f.values)
    out = np.fft.ifftn(spec * mult).real
    return GridFunction(f.lo, f.K, out)


def riesz_apply(i: int, f: GridFunction) -> GridFunction:
    """Fourier multiplier -i xi_i / |xi| on the periodic box; the zero mode
    maps to zero."""
    if not 0 <= i < f.n:
        raise RangeParameterError("component index out of range")
    xi = _freq_grids(f)
    norm = np.sqrt(sum(x ** 2 for x in xi))
    norm[(0,) * f.n] = 1.0
    mult = -1j * xi[i] / norm
    mult[(0,) * f.n] = 0.0
    return _apply_multiplier(f, mult)


def spectral_derivative(f: GridFunction, axis: int) -> GridFunction:
    xi = _freq_grids(f)
    return _apply_multiplier(f, 1j * xi[axis])


def require_zero_mean(f: GridFunction, tol: float = 1e-10):
    mean = float(f.values.mean())
    scale = max(float(np.max(np.abs(f.values))), 1.0)
    if abs(mean) > tol * scale:
        raise DomainError(f"input must have zero mean (got {mean:.3e})")


@dataclass(frozen=True)
class VectorField:
    """Tuple of grid components on a common periodic box."""

    components: tuple
    kind: str = "general"

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise GeometryError("vector field needs at least one component")
        base = comps[0]
        for c in comps[1:]:
            base._check_layout(c)
        object.__setattr__(self, "components", comps)

    @property
    def n(self):
        return len(self.components)

    def curl_residual(self) -> float:
        """Max spectral residual of d_i F_j - d_j F_i over component pairs,
        relative to the field scale."""
        worst = 0.0
        scale = max(self.l2_norm(), 1e-300)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                r = (spectral_derivative(self.components[j], i)
                     - spectral_derivative(self.components[i], j))
                worst = max(worst, r.l2_norm())
        return worst / scale

    def div_residual(self) -> float:
        scale = max(self.l2_norm(), 1e-300)
        total = spectral_derivative(self.components[0], 0)
        for i in range(1, self.n):
            total = total + spectral_derivative(self.components[i], i)
        return total.l2_norm() / scale

    def riesz_sum_residual(self) -> float:
        """Residual of sum_i R_i(component_i), which vanishes for
        divergence-free fields."""
        scale = max(self.l2_norm(), 1e-300)
        total = riesz_apply(0, self.components[0])
        for i in range(1, self.n):
            total = total + riesz_apply(i, self.components[i])
        return total.l2_norm() / scale

    def l2_norm(self) -> float:
        return math.sqrt(sum(c.l2_norm() ** 2 for c in self.components))


def curl_free_field(f: GridFunction) -> VectorField:
    """Gradient-type field with components R_i f; the round trip
    -sum_i R_i(F_i) recovers f."""
    require_zero_mean(f)
    comps = tuple(riesz_apply(i, f) for i in range(f.n))
    field = VectorField(comps, kind="curl_free")
    recon = riesz_apply(0, comps[0])
    for i in range(1, f.n):
        recon = recon + riesz_apply(i, comps[i])
    resid = float(np.max(np.abs(recon.values + f.values)))
    if resid > 1e-8 * max(1.0, float(np.max(np.abs(f.values)))):
        raise DomainError(f"round-trip residual {resid:.2e}")
    return field


def div_free_field(u: GridFunction) -> VectorField:
    """Rotated-gradient field (d2 u, -d1 u) in two dimensions."""
    if u.n != 2:
        raise CapabilityError(
            "stream construction is two-dimensional; use helmholtz_project "
            "for other dimensions")
    comps = (spectral_derivative(u, 1),
             GridFunction(u.lo, u.K, -spectral_derivative(u, 0).values))
    return VectorField(comps, kind="div_free")


def helmholtz_project(V: VectorField):
    """Spectral splitting into gradient-type and divergence-free parts;
    the parts sum to the input exactly and are orthogonal mode by mode.
    The zero mode goes to the divergence-free part."""
    n = V.n
    f0 = V.components[0]
    xi = _freq_grids(f0)
    norm2 = sum(x ** 2 for x in xi)
    norm2[(0,) * n] = 1.0
    specs = [np.fft.fftn(c.values) for c in V.components]
    dot = sum(x * s for x, s in zip(xi, specs))
    curl_parts = []
    div_parts = []
    for i in range(n):
        proj = xi[i] * dot / norm2
        proj[(0,) * n] = 0.0
        rest = specs[i] - proj
        curl_parts.append(GridFunction(f0.lo, f0.K, np.fft.ifftn(proj).real))
        div_parts.append(GridFunction(f0.lo, f0.K, np.fft.ifftn(rest).real))
    return (VectorField(tuple(curl_parts), kind="curl_free"),
            VectorField(tuple(div_parts), kind="div_free"))


# ---------------------------------------------------------------------------
# almost-diagonal weight


def almost_diagonal_weight(I: DyadicCube, I2: DyadicCube,
                           delta: float) -> float:
    """Scale-gap times center-distance decay weight in (0, 1]."""
    if not 0.0 < delta <= 0.5:
        raise RangeParameterError("delta must lie in (0, 1/2]")
    if I.n != I2.n:
        raise GeometryError("cubes of different dimensions")
    n = I.n
    gap = abs(I.j - I2.j)
    s1 = 2.0 ** (-I.j)
    s2 = 2.0 ** (-I2.j)
    dist = float(np.linalg.norm(I.center - I2.center))
    return (2.0 ** (-gap * (delta + n / 2.0))
            * ((s1 + s2) / (s1 + s2 + dist)) ** (n + delta))


@dataclass(frozen=True)
class AlmostDiagonalEntry:
    """One evaluated weight with its inputs, validated to lie in (0, 1]."""

    I: DyadicCube
    I2: DyadicCube
    delta: float
    value: float

    def __post_init__(self):
        if not 0.0 < self.value <= 1.0:
            raise RangeParameterError("weight value outside (0, 1]")

    @classmethod
    def build(cls, I, I2, delta):
        return cls(I, I2, delta, almost_diagonal_weight(I, I2, delta))


# ---------------------------------------------------------------------------
# the div-curl experiment


def cutoff_window(f: GridFunction, margin: float = 0.125,
                  roll: float = 0.125) -> GridFunction:
    """Smooth cutoff mask: 1 on the central part of the box, rolling off to
    0 within ``margin`` of the boundary over a width ``roll`` (fractions of
    each side)."""
    parts = []
    for a in range(f.n):
        x = f.axis_coords(a)
        lo, hi = f.lo[a], f.hi[a]
        side = hi - lo
        u0, u1 = lo + margin * side, lo + (margin + roll) * side
        v1, v0 = hi - (margin + roll) * side, hi - margin * side
        up = np.clip((x - u0) / max(u1 - u0, 1e-300), 0.0, 1.0)
        down = np.clip((v0 - x) / max(v0 - v1, 1e-300), 0.0, 1.0)
        ramp = 0.5 - 0.5 * np.cos(math.pi * up)
        ramp_down = 0.5 - 0.5 * np.cos(math.pi * down)
        parts.append(ramp * ramp_down)
    grid = parts[0]
    for a in range(1, f.n):
        grid = np.multiply.outer(grid, parts[a])
    return GridFunction(f.lo, f.K, grid)


def div_curl_experiment(F: VectorField, G: VectorField, p: float,
                        system: WaveletSystem, j_min: int = 0,
                        j_max: int = 5, window_margin: float = 0.125,
                        lipschitz_kw=None) -> dict:
    """Product split of a gradient-type field against a divergence-free
    field: spectral residual checks, the windowed wavelet-side split into
    the diagonal part A and the cancellative part B, and the weighted
    sequence diagnostics with the ratio against the factor norms."""
    n = F.n
    if G.n != n:
        raise GeometryError("fields of different dimensions")
    base = F.components[0]
    base._check_layout(G.components[0])
    exp_n = n
    if not exp_n / (exp_n + 1.0) < p < 1.0:
        raise PreconditionError(f"p={p} outside (n/(n+1), 1)")
    alpha = n * (1.0 / p - 1.0)
    lipschitz_kw = dict(lipschitz_kw or {})

    residuals = {
        "curl": F.curl_residual(),
        "div": G.div_residual(),
        "riesz_sum": G.riesz_sum_residual(),
    }
    # round trip of the gradient-type construction
    recon = riesz_apply(0, F.components[0])
    for i in range(1, n):
        recon = recon + riesz_apply(i, F.components[i])
    back = tuple(riesz_apply(i, GridFunction(base.lo, base.K, -recon.values))
                 for i in range(n))
    rt = max(float(np.max(np.abs(back[i].values - F.components[i].values)))
             for i in range(n))
    residuals["riesz_roundtrip"] = rt / max(1.0, F.l2_norm())

    fg = GridFunction(base.lo, base.K,
                      sum(Fi.values * Gi.values
                          for Fi, Gi in zip(F.components, G.components)))
    # exact pairing check: the product of a gradient-type field with a
    # divergence-free field integrates to zero on the torus
    residuals["pairing_integral"] = abs(fg.quadrature()) / max(
        F.l2_norm() * G.l2_norm(), 1e-300)

    eta = cutoff_window(base, margin=window_margin)
    eta2 = GridFunction(base.lo, base.K, eta.values ** 2)

    w = Weight(n, p)
    K = base.K
    f_fields = [analyze(GridFunction(base.lo, K, eta.values * Fi.values),
                        system, j_min, j_max)
                for Fi in F.components]
    g_fields = [analyze(GridFunction(base.lo, K, eta.values * Gi.values),
                        system, j_min, j_max)
                for Gi in G.components]

    split_A = None
    split_B = None
    frame = None
    term_count = 0
    for fi, gi in zip(f_fields, g_fields):
        res = renormalize(fi, gi, system, K, frame=frame)
        if frame is None:
            frame = (res.value.start_index(), res.value.shape)
        A_i = res.diagonal_part
        B_i = res.cancellative_part
        split_A = A_i if split_A is None else split_A + A_i
        split_B = B_i if split_B is None else split_B + B_i
        term_count += res.term_count
    windowed_integral = split_A.quadrature() + split_B.quadrature()
    a_integral = split_A.quadrature()

    fg_windowed = GridFunction(base.lo, K, eta2.values * fg.values)
    c_fg = analyze(fg_windowed, system, j_min, j_max)
    c_A = analyze(split_A, system, j_min, j_max)
    c_B = analyze(split_B, system, j_min, j_max)

    norm_fg = sequence_hardy_norm(c_fg, p, weight=w)
    norm_A = sequence_hardy_norm(c_A, 1.0)
    norm_B = sequence_hardy_norm(c_B, p, weight=w)

    f_norm = math.sqrt(sum(sequence_hardy_norm(c, p) ** 2
                           for c in f_fields))
    g_lips = math.sqrt(sum(lipschitz_norm(Gi, alpha, **lipschitz_kw) ** 2
                           for Gi in G.components))
    g_anchor = math.sqrt(sum(float(Gi.values[(0,) * n]) ** 2
                             for Gi in G.components))
    g_norm_plus = g_lips + g_anchor

    denom = f_norm * g_norm_plus
    ratio = norm_fg / denom if denom > 0 else float("inf")
    return {
        "p": p,
        "alpha": alpha,
        "K": K,
        "norms": {
            "FG_weighted_Hp": norm_fg,
            "A_H1": norm_A,
            "B_Hp_w": norm_B,
        },
        "factor_norms": {
            "F_Hp_diag": f_norm,
            "G_lipschitz": g_lips,
            "G_lipschitz_plus": g_norm_plus,
        },
        "ratio": ratio,
        "residuals": {**residuals,
                      "A_integral": a_integral,
                      "windowed_split_integral": windowed_integral},
        "j_range": [j_min, j_max],
        "term_count": term_count,
    }
