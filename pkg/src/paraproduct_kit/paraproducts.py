"""The four bilinear components of a renormalized pointwise product.

For coefficient fields f, g sharing a scale range, the product of their
realizations splits into four bilinear sums over equal-scale index pairs:
smooth-by-detail, detail-by-smooth, off-diagonal detail-by-detail, and the
diagonal squares.  The diagonal part carries the non-cancellative content;
the other three integrate to zero term by term.

Components are evaluated on a sampling grid by accumulating windowed
products of the 1D generator realizations; pairs are enumerated per scale
with corner-index arithmetic (supports overlap only when corner indices
differ by less than the support radius), never by the quadratic scan.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .backend import axpy_window_1d, axpy_window_2d, axpy_window_3d
from .errors import (CapabilityError, GeometryError, PrecisionError,
                     PreconditionError, ProbeError)
from .fields import CoeffField, DyadicCube, GridFunction, TensorIndex
from .transform import (analyze, base_realization, scaling_ladder,
                        scaling_sample, synthesize, tensor_sample)
from .wavelets import WaveletSystem

__all__ = [
    "ParaproductResult",
    "KernelProbe",
    "paraproduct_component",
    "renormalize",
    "export_renormalize",
    "kernel_probe",
    "separation_probes",
    "molecule_check",
    "pi2_split_check",
]


# ---------------------------------------------------------------------------
# windowed accumulation


def _product_window(system, rel, kind_a, kind_b, d):
    """Overlap product of two 1D generator realizations at relative
    resolution ``rel``, the second shifted by ``d`` cubes.  Returns
    (values, start) with the start in lattice cells relative to the first
    cube's corner, or None when the supports do not meet."""
    key = (rel, kind_a, kind_b, d)
    cache = system._product_cache
    if key in cache:
        return cache[key]
    ua, sa = base_realization(system, rel, kind_a)
    ub, sb = base_realization(system, rel, kind_b)
    shift = d * (1 << rel)
    lo = max(sa, sb + shift)
    hi = min(sa + ua.size, sb + shift + ub.size)
    if hi <= lo:
        cache[key] = None
        return None
    w = np.ascontiguousarray(ua[lo - sa:hi - sa]
                             * ub[lo - sb - shift:hi - sb - shift])
    w.flags.writeable = False
    cache[key] = (w, lo)
    return cache[key]


def _axpy(out, starts, coeff, windows):
    n = len(windows)
    if n == 1:
        axpy_window_1d(out, starts[0], coeff, windows[0])
    elif n == 2:
        axpy_window_2d(out, starts[0], starts[1], coeff, windows[0],
                       windows[1])
    elif n == 3:
        axpy_window_3d(out, starts[0], starts[1], starts[2], coeff,
                       windows[0], windows[1], windows[2])
    else:
        raise CapabilityError("paraproducts support dimensions 1..3")


def _accumulate_term(out, out0, system, rel, j, n, coeff, k_a, kinds_a,
                     k_b, kinds_b):
    """Add coeff * (first generator at k_a) * (second at k_b) to ``out``."""
    windows = []
    starts = []
    for a in range(n):
        pw = _product_window(system, rel, kinds_a[a], kinds_b[a],
                             k_b[a] - k_a[a])
        if pw is None:
            return False
        w, wstart = pw
        pos = k_a[a] * (1 << rel) + wstart - out0[a]
        if pos < 0 or pos + w.size > out.shape[a]:
            raise GeometryError("output frame does not cover a term window")
        windows.append(w)
        starts.append(pos)
    _axpy(out, starts, coeff * 2.0 ** (j * n), windows)
    return True


def _kinds(lam):
    return tuple("psi" if b else "phi" for b in lam)


def _ladder_value(level, k):
    if level is None:
        return 0.0
    arr, start = level
    idx = []
    for ka, sa, sh in zip(k, start, arr.shape):
        i = ka - sa
        if i < 0 or i >= sh:
            return 0.0
        idx.append(i)
    return float(arr[tuple(idx)])


def _group_by_corner(bucket):
    out = {}
    for (k, lam), v in sorted(bucket.items()):
        out.setdefault(k, []).append((lam, v))
    return out


def _check_pair(f: CoeffField, g: CoeffField):
    if f.n != g.n:
        raise GeometryError("dimension mismatch")
    if (f.j_min, f.j_max) != (g.j_min, g.j_max):
        raise GeometryError("the two fields must share one scale range")


def _neighbor_offsets(m, n):
    span = range(-(m - 1), m)
    return [d for d in itertools.product(span, repeat=n)]


def _pair_frame(f, g, ladders, system, K_out):
    """Common output frame (start indices, shape) on the K_out lattice that
    covers every term window of all four components."""
    n = f.n
    m = int(round(system.support_radius))
    lo = [None] * n
    hi = [None] * n

    def upd(a, i0, i1):
        lo[a] = i0 if lo[a] is None else min(lo[a], i0)
        hi[a] = i1 if hi[a] is None else max(hi[a], i1)

    for j in range(f.j_min, f.j_max):
        rel = K_out - j
        ext = []
        for kind in ("phi", "psi"):
            arr, st = base_realization(system, rel, kind)
            ext.append((st, st + arr.size))
        b0 = min(e[0] for e in ext)
        b1 = max(e[1] for e in ext)
        for c in (f, g):
            bucket = c.by_scale().get(j)
            if bucket:
                for a in range(n):
                    kk = [key[0][a] for key in bucket]
                    upd(a, (min(kk) - m) * (1 << rel) + b0,
                        (max(kk) + m) * (1 << rel) + b1)
        for lad in ladders:
            lev = lad.get(j)
            if lev is not None:
                arr, st = lev
                for a in range(n):
                    upd(a, st[a] * (1 << rel) + b0,
                        (st[a] + arr.shape[a]) * (1 << rel) + b1)
    if lo[0] is None:
        boxes = [b for b in (f.box, g.box) if b is not None]
        if not boxes:
            raise GeometryError("empty fields need a declared box")
        scale = 2.0 ** K_out
        lo = [int(math.floor(min(b[a][0] for b in boxes) * scale))
              for a in range(n)]
        hi = [int(math.ceil(max(b[a][1] for b in boxes) * scale))
              for a in range(n)]
    return tuple(lo), tuple(h - l for h, l in zip(hi, lo))


def _component_accumulate(i, f, g, system, K_out, lad_f, lad_g, out, out0):
    """Accumulate component ``i`` into ``out``; returns the term count."""
    n = f.n
    m = int(round(system.support_radius))
    offsets = _neighbor_offsets(m, n)
    count = 0
    for j in range(f.j_min, f.j_max):
        rel = K_out - j
        fw = f.by_scale().get(j, {})
        gw = g.by_scale().get(j, {})
        if i == 1:
            level = lad_f.get(j)
            if level is None or not gw:
                continue
            for (kp, lam), vg in sorted(gw.items()):
                kinds_b = _kinds(lam)
                for d in offsets:
                    k = tuple(kp[a] + d[a] for a in range(n))
                    vf = _ladder_value(level, k)
                    if vf == 0.0:
                        continue
                    if _accumulate_term(out, out0, system, rel, j, n,
                                        vf * vg, k, ("phi",) * n, kp,
                                        kinds_b):
                        count += 1
        elif i == 2:
            level = lad_g.get(j)
            if level is None or not fw:
                continue
            for (k, lam), vf in sorted(fw.items()):
                kinds_a = _kinds(lam)
                for d in offsets:
                    kp = tuple(k[a] + d[a] for a in range(n))
                    vg = _ladder_value(level, kp)
                    if vg == 0.0:
                        continue
                    if _accumulate_term(out, out0, system, rel, j, n,
                                        vf * vg, k, kinds_a, kp,
                                        ("phi",) * n):
                        count += 1
        elif i == 3:
            if not fw or not gw:
                continue
            g_by_corner = _group_by_corner(gw)
            for (k, lam), vf in sorted(fw.items()):
                kinds_a = _kinds(lam)
                for d in offsets:
                    kp = tuple(k[a] + d[a] for a in range(n))
                    partners = g_by_corner.get(kp)
                    if not partners:
                        continue
                    for lamp, vg in partners:
                        if kp == k and lamp == lam:
                            continue
                        if _accumulate_term(out, out0, system, rel, j, n,
                                            vf * vg, k, kinds_a, kp,
                                            _kinds(lamp)):
                            count += 1
        elif i == 4:
            if not fw or not gw:
                continue
            for (k, lam), vf in sorted(fw.items()):
                vg = gw.get((k, lam))
                if vg is None:
                    continue
                kinds = _kinds(lam)
                if _accumulate_term(out, out0, system, rel, j, n, vf * vg,
                                    k, kinds, k, kinds):
                    count += 1
        else:
            raise CapabilityError("component index must be 1..4")
    return count


def paraproduct_component(i, f: CoeffField, g: CoeffField,
                          system: WaveletSystem, K_out: int,
                          frame=None) -> GridFunction:
    """One of the four bilinear components, sampled at step 2**-K_out.

    Component 1 pairs the smooth ladder of f with the detail entries of g
    at equal scale; component 2 is the mirror; component 3 sums distinct
    equal-scale detail pairs with overlapping supports; component 4 is the
    diagonal of squared details."""
    _check_pair(f, g)
    K_out = int(K_out)
    if K_out < f.j_max:
        raise PrecisionError("K_out must be at least the finest scale")
    lad_f = scaling_ladder(f, system)
    lad_g = scaling_ladder(g, system)
    if frame is None:
        frame = _pair_frame(f, g, (lad_f, lad_g), system, K_out)
    out0, shape = frame
    out = np.zeros(shape)
    _component_accumulate(i, f, g, system, K_out, lad_f, lad_g, out, out0)
    return GridFunction.from_start_index(out0, K_out, out)


@dataclass
class ParaproductResult:
    """All four components of a renormalized product plus bookkeeping."""

    value: GridFunction
    components: tuple
    term_counts: tuple
    reconstruction_residual: float
    factor_norms: tuple

    @property
    def diagonal_part(self) -> GridFunction:
        """The non-cancellative diagonal component."""
        return self.components[3]

    @property
    def cancellative_part(self) -> GridFunction:
        """Sum of the three mean-zero components."""
        c = self.components
        return c[0] + c[1] + c[2]

    @property
    def term_count(self) -> int:
        return int(sum(self.term_counts))


def renormalize(f: CoeffField, g: CoeffField, system: WaveletSystem,
                K_out: int, frame=None) -> ParaproductResult:
    """All four components on a common frame, their sum, and the residual of
    the sum against the pointwise product of the factor realizations."""
    _check_pair(f, g)
    K_out = int(K_out)
    if K_out < f.j_max:
        raise PrecisionError("K_out must be at least the finest scale")
    lad_f = scaling_ladder(f, system)
    lad_g = scaling_ladder(g, system)
    if frame is None:
        frame = _pair_frame(f, g, (lad_f, lad_g), system, K_out)
    out0, shape = frame
    comps = []
    counts = []
    for i in (1, 2, 3, 4):
        out = np.zeros(shape)
        counts.append(_component_accumulate(i, f, g, system, K_out, lad_f,
                                            lad_g, out, out0))
        comps.append(GridFunction.from_start_index(out0, K_out, out))
    total = comps[0] + comps[1] + comps[2] + comps[3]
    lo = total.lo
    sf = synthesize(f, system, K_out, lo=lo, shape=shape)
    sg = synthesize(g, system, K_out, lo=lo, shape=shape)
    resid = float(np.max(np.abs(total.values - sf.values * sg.values)))
    return ParaproductResult(total, tuple(comps), tuple(counts), resid,
                             (f.l2_norm(), g.l2_norm()))


def export_renormalize(result: ParaproductResult, directory):
    """CSV per component plus a JSON manifest with residuals and counts."""
    os.makedirs(directory, exist_ok=True)
    names = ["smooth_detail", "detail_smooth", "detail_offdiag",
             "diagonal_squares"]
    for name, comp in zip(names, result.components):
        comp.save_csv(os.path.join(directory, f"{name}.csv"))
    result.value.save_csv(os.path.join(directory, "product.csv"))
    manifest = {
        "components": names,
        "term_counts": list(result.term_counts),
        "reconstruction_residual": result.reconstruction_residual,
        "factor_l2_norms": list(result.factor_norms),
    }
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# kernel probes


@dataclass
class KernelProbe:
    """Off-diagonal kernel samples with fitted decay data."""

    points: list
    values: np.ndarray
    separations: np.ndarray
    fitted_slope: float
    fitted_constant: float
    tail_estimate: float
    scale_range: tuple
    regularity_slope: float = float("nan")
    regularity_constants: np.ndarray = field(
        default_factory=lambda: np.array([]))


def separation_probes(separations, anchor=1.0 / math.pi):
    """Probe triples (x, y, z) with y = z = x + s for each separation s."""
    return [(anchor, anchor + s, anchor + s) for s in separations]


def _translate_sum(system, kind, j, x, y):
    """sum_k gen_{j,k}(x) gen_{j,k}(y) over the finitely many overlapping
    translates at scale j."""
    scale = 2.0 ** j
    o = system.bank.offset
    m = system.bank.length - 1
    tx, ty = scale * x, scale * y
    klo = int(math.ceil(max(tx, ty) - o - m))
    khi = int(math.floor(min(tx, ty) - o))
    if khi < klo:
        return 0.0
    ks = np.arange(klo, khi + 1)
    vx = system.evaluate(kind, np.full(ks.shape, tx) - ks)
    vy = system.evaluate(kind, np.full(ks.shape, ty) - ks)
    return float(scale * np.sum(np.atleast_1d(vx) * np.atleast_1d(vy)))


def _diag_sum(system, j, x, y, z):
    """sum_k psi_{j,k}(x)^2 psi_{j,k}(y) psi_{j,k}(z)."""
    scale = 2.0 ** j
    o = system.bank.offset
    m = system.bank.length - 1
    ts = [scale * t for t in (x, y, z)]
    klo = int(math.ceil(max(ts) - o - m))
    khi = int(math.floor(min(ts) - o))
    if khi < klo:
        return 0.0
    ks = np.arange(klo, khi + 1)
    vx = np.atleast_1d(system.evaluate("psi", np.full(ks.shape, ts[0]) - ks))
    vy = np.atleast_1d(system.evaluate("psi", np.full(ks.shape, ts[1]) - ks))
    vz = np.atleast_1d(system.evaluate("psi", np.full(ks.shape, ts[2]) - ks))
    return float(scale ** 2 * np.sum(vx * vx * vy * vz))


def kernel_value(i, system, j_lo, j_hi, x, y, z):
    """Truncated off-diagonal kernel of component ``i`` at (x, y, z),
    summed over scales j in [j_lo, j_hi]."""
    total = 0.0
    for j in range(j_lo, j_hi + 1):
        if i == 1:
            total += (_translate_sum(system, "phi", j, x, y)
                      * _translate_sum(system, "psi", j, x, z))
        elif i == 2:
            total += (_translate_sum(system, "psi", j, x, y)
                      * _translate_sum(system, "phi", j, x, z))
        elif i == 3:
            total += (_translate_sum(system, "psi", j, x, y)
                      * _translate_sum(system, "psi", j, x, z)
                      - _diag_sum(system, j, x, y, z))
        elif i == 4:
            total += _diag_sum(system, j, x, y, z)
        else:
            raise CapabilityError("component index must be 1..4")
    return total


def kernel_probe(i, system: WaveletSystem, scale_range, probes,
                 regularity_step=0.125) -> KernelProbe:
    """Evaluate the truncated kernel at off-diagonal probe triples and fit
    the log-log decay slope; also fit the first-difference quotients that
    carry the regularity exponent."""
    j_lo, j_hi = int(scale_range[0]), int(scale_range[1])
    vals = []
    seps = []
    for (x, y, z) in probes:
        s = abs(x - y) + abs(x - z) + abs(y - z)
        if s == 0.0:
            raise ProbeError("probe lies on the diagonal")
        seps.append(s)
        vals.append(kernel_value(i, system, j_lo, j_hi, x, y, z))
    vals = np.array(vals)
    seps = np.array(seps)
    ok = np.abs(vals) > 0.0
    if ok.sum() < 2:
        raise ProbeError("too few nonzero kernel samples to fit a slope")
    slope, intercept = np.polyfit(np.log(seps[ok]), np.log(np.abs(vals[ok])),
                                  1)
    # Difference quotients in the first argument, displaced by a fixed
    # fraction of each probe's separation.
    dq = []
    for (x, y, z), s in zip(probes, seps):
        step = regularity_step * s
        v0 = kernel_value(i, system, j_lo, j_hi, x, y, z)
        v1 = kernel_value(i, system, j_lo, j_hi, x + step, y, z)
        dq.append(abs(v1 - v0) / step)
    dq = np.array(dq)
    okq = dq > 0.0
    if okq.sum() >= 2:
        reg_slope = float(np.polyfit(np.log(seps[okq]), np.log(dq[okq]),
                                     1)[0])
    else:
        reg_slope = float("nan")
    n = 1
    reg_consts = dq * seps ** (2 * n + 1)
    # Coarse-scale tail: each omitted scale contributes at most the crude
    # envelope bound, which decays geometrically toward coarse scales.
    mx = max(float(np.max(np.abs(system.phi_samples.values))),
             float(np.max(np.abs(system.psi_samples.values))))
    mm = system.bank.length
    per = (mm * mx * mx) ** 2
    tail = per * 4.0 ** j_lo / 3.0
    return KernelProbe(list(probes), vals, seps, float(slope),
                       float(math.exp(intercept)), float(tail),
                       (j_lo, j_hi), reg_slope, reg_consts)


# ---------------------------------------------------------------------------
# molecule conditions


def _common_frame(gfs):
    K = gfs[0].K
    n = gfs[0].n
    starts = [g.start_index() for g in gfs]
    lo = [min(s[a] for s in starts) for a in range(n)]
    hi = [max(s[a] + g.shape[a] for s, g in zip(starts, gfs))
          for a in range(n)]
    shape = tuple(h - l for h, l in zip(hi, lo))
    lo_f = tuple(l * 2.0 ** (-K) for l in lo)
    return [g.embed(lo_f, shape) for g in gfs]


def _fd_derivative(values, h, gamma):
    out = values
    for axis, order in enumerate(gamma):
        for _ in range(order):
            out = np.gradient(out, h, axis=axis)
    return out


def molecule_check(system: WaveletSystem, cube: DyadicCube, k_shift,
                   lam, M: int, orders=(0,), K=None) -> dict:
    """Verify the smooth-decay bound and the zero integral for the product
    of the normalized scaling function on a cube with the wavelet on the
    shifted cube.

    For each derivative order the report carries the smallest constant
    making the decay envelope an upper bound on the whole grid, and the
    count of grid points violating the fitted bound (zero by construction;
    reported for auditability)."""
    n = cube.n
    if max(orders) > system.smoothness:
        raise CapabilityError(
            f"order {max(orders)} exceeds system smoothness "
            f"{system.smoothness}")
    if M <= n:
        raise CapabilityError("decay order M must exceed the dimension")
    K = int(K) if K is not None else cube.j + system.K_cascade
    shifted = DyadicCube(cube.j, tuple(cube.k[a] + int(k_shift[a])
                                       for a in range(n)))
    phi = scaling_sample(system, cube, K)
    psi = tensor_sample(system, TensorIndex(shifted, tuple(lam)), K)
    phi, psi = _common_frame([phi, psi])
    vol_half = math.sqrt(cube.volume)
    prod = GridFunction(phi.lo, K, vol_half * phi.values * psi.values)

    j = cube.j
    mesh = prod.meshgrid()
    corner = cube.corner
    dist = np.zeros(prod.shape)
    for a in range(n):
        dist += (mesh[a] - corner[a]) ** 2
    dist = np.sqrt(dist)
    denom = (1.0 + 2.0 ** j * dist) ** M

    constants = {}
    violations = {}
    for order in sorted(set(int(o) for o in orders)):
        gammas = [gm for gm in itertools.product(range(order + 1), repeat=n)
                  if sum(gm) == order]
        worst = 0.0
        for gm in gammas:
            deriv = _fd_derivative(prod.values, prod.h, gm)
            envelope = 2.0 ** (j * n / 2.0) * 2.0 ** (j * order) / denom
            ratio = np.abs(deriv) / envelope
            worst = max(worst, float(np.max(ratio)))
        constants[order] = worst
        if worst > 0.0:
            count = 0
            for gm in gammas:
                deriv = _fd_derivative(prod.values, prod.h, gm)
                envelope = (2.0 ** (j * n / 2.0) * 2.0 ** (j * order)
                            / denom)
                count += int(np.sum(np.abs(deriv) > worst * envelope
                                    * (1 + 1e-12)))
            violations[order] = count
        else:
            violations[order] = 0
    return {
        "zero_integral": prod.quadrature(),
        "max_abs": prod.max_abs(),
        "constants": constants,
        "violations": violations,
        "scale": j,
        "shift": tuple(int(x) for x in k_shift),
        "signature": tuple(int(x) for x in lam),
        "decay_order": int(M),
    }


# ---------------------------------------------------------------------------
# the atom split of the detail-by-smooth component


def pi2_split_check(atom, g: GridFunction, p: float,
                    system: WaveletSystem) -> dict:
    """Split the detail-by-smooth component of (atom, g) into a mean-zero
    part plus a rescaled-atom multiple of the local mean of g, and verify
    the identity pointwise together with the atom bounds of the rescaled
    part on the dilated cube."""
    from .atoms import atom_verify

    report = atom_verify(atom, system)
    if not report["passed"]:
        raise PreconditionError(f"input is not a verified atom: {report}")
    coeffs = atom.coeffs
    if coeffs.scaling:
        raise PreconditionError("atom expansions must be pure detail")
    R = atom.cube
    n = R.n
    j_l = R.j
    j_hi = coeffs.j_max
    m = system.support_radius
    big_lo, big_hi = R.dilated_bounds(2.0 * m)
    for a in range(n):
        if g.lo[a] > big_lo[a] + 1e-12 or g.hi[a] < big_hi[a] - 1e-12:
            raise PreconditionError(
                "g must cover the 2m-dilation of the atom cube")
    if g.K < j_hi:
        raise PrecisionError("g grid too coarse for the atom scales")

    cg = analyze(g, system, j_l, j_hi)
    a_field = CoeffField(n, j_l, j_hi, coeffs.wavelet, {}, box=coeffs.box)

    # local mean of g over the atom cube
    r_lo = R.corner
    r_hi = R.corner + R.side
    g_mean = float(g.restrict(tuple(r_lo), tuple(r_hi)).values.mean())

    direct = paraproduct_component(2, a_field, cg, system, g.K)
    frame_lo, frame_shape = direct.lo, direct.shape

    # truncation of g's detail expansion to cubes inside the 2m-dilation
    b_entries = {}
    for (j, k, lam), v in cg.wavelet.items():
        side = 2.0 ** (-j)
        inside = all(k[a] * side >= big_lo[a] - 1e-12
                     and (k[a] + 1) * side <= big_hi[a] + 1e-12
                     for a in range(n))
        if inside:
            b_entries[(j, k, lam)] = v
    b_field = CoeffField(n, j_l, j_hi, b_entries, {}, box=cg.box)
    h1 = paraproduct_component(2, a_field, b_field, system, g.K,
                               frame=(direct.start_index(), frame_shape))

    # the finitely many same-scale smooth terms over the atom cube
    a_real = synthesize(a_field, system, g.K, lo=frame_lo, shape=frame_shape)
    vol = R.volume
    m_int = int(round(m))
    atom_phi_sum = np.zeros(frame_shape)
    h1_extra = np.zeros(frame_shape)
    for d in _neighbor_offsets(m_int, n):
        kI = tuple(R.k[a] + d[a] for a in range(n))
        s_I = cg.scaling.get(kI, 0.0)
        phi_I = scaling_sample(system, DyadicCube(j_l, kI), g.K)
        phi_I = phi_I.embed(frame_lo, frame_shape)
        prod = a_real.values * phi_I.values
        if not np.any(prod):
            continue
        atom_phi_sum += prod * math.sqrt(vol)
        # mean-free smooth factor: <g, phi_I - |R|^{-1/2} chi_R> recombined
        q_inner = vol ** (1.0 - 1.0 / p) * (s_I / math.sqrt(vol) - g_mean)
        h1_extra += prod * vol ** (-0.5 + 1.0 / p) * q_inner
    h1_total = h1.values + h1_extra

    big_vol = (2.0 * m) ** n * vol
    bound = big_vol ** (0.5 - 1.0 / p)
    norm_sum = float(np.sqrt(np.sum(atom_phi_sum ** 2)
                             * direct.h ** n))
    c_const = norm_sum / bound if norm_sum > 0 else 1.0
    h2 = atom_phi_sum / c_const if norm_sum > 0 else atom_phi_sum

    recon = h1_total + c_const * g_mean * h2
    scale = max(float(np.max(np.abs(direct.values))), 1e-300)
    identity_residual = float(np.max(np.abs(direct.values - recon))) / scale

    h2_gf = GridFunction(frame_lo, g.K, h2)
    h2_l2 = h2_gf.l2_norm()
    h2_integral = h2_gf.quadrature()
    # support scan of the rescaled atom against the dilated cube
    nz = np.argwhere(np.abs(h2) > 1e-12 * max(1.0, float(np.max(np.abs(h2)))))
    supp_ok = True
    if nz.size:
        start = h2_gf.start_index()
        hgrid = h2_gf.h
        for a in range(n):
            x0 = (nz[:, a].min() + start[a]) * hgrid
            x1 = (nz[:, a].max() + 1 + start[a]) * hgrid
            if x0 < big_lo[a] - hgrid or x1 > big_hi[a] + hgrid:
                supp_ok = False
    return {
        "identity_residual": identity_residual,
        "g_mean": g_mean,
        "constant": c_const,
        "h2_l2": h2_l2,
        "h2_l2_bound": bound,
        "h2_l2_ok": h2_l2 <= bound * (1 + 1e-10),
        "h2_integral": h2_integral,
        "h2_support_ok": supp_ok,
        "b_entry_count": len(b_entries),
    }
