"""Tensor-product multiresolution transforms on dyadic grids.

``analyze`` and ``synthesize`` move between grid samples and sparse
coefficient fields through the exact two-channel pyramid with zero
extension: filtering a finitely supported signal keeps every nonzero
output, so the discrete transform is orthogonal to floating precision and
index ranges may spill slightly outside the declared box.

Grid samples produced by ``synthesize`` (and by ``tensor_sample``) are the
level-K realizations of the expansion, i.e. lattice values of its
projection onto the resolution-K space.  They converge to pointwise values
as K grows, and every algebraic identity between expansions (Parseval,
orthogonality, two-scale splits) holds on them exactly.
"""

from __future__ import annotations

import numpy as np

from .backend import down_batch, up_batch
from .errors import GeometryError, PrecisionError, RangeParameterError
from .fields import CoeffField, DyadicCube, GridFunction, TensorIndex
from .wavelets import WaveletSystem

__all__ = [
    "analyze",
    "synthesize",
    "project_scales",
    "tensor_sample",
    "scaling_sample",
    "scaling_ladder",
    "base_realization",
]


def _ceil_div(a, b):
    return -((-a) // b)


def _axis_down(arr, start_ax, taps, offset, axis):
    """One filtered downsampling along ``axis``: y[k] = sum_t taps[t] *
    x[2k + offset + t].  Returns (array, first output index)."""
    a = np.moveaxis(arr, axis, -1)
    lead = a.shape[:-1]
    N = a.shape[-1]
    B = int(np.prod(lead)) if lead else 1
    a2 = np.ascontiguousarray(a.reshape(B, N))
    taps = np.ascontiguousarray(taps)
    L = taps.size
    k_lo = _ceil_div(start_ax - (offset + L - 1), 2)
    k_hi = (start_ax + N - 1 - offset) // 2
    ny = k_hi - k_lo + 1
    if ny <= 0:
        raise GeometryError("axis too short for one filter step")
    width = 2 * (ny - 1) + L
    off = 2 * k_lo + offset - start_ax
    xp = np.zeros((B, width))
    q0 = max(0, -off)
    q1 = min(width, N - off)
    if q1 > q0:
        xp[:, q0:q1] = a2[:, q0 + off:q1 + off]
    y2 = down_batch(xp, taps, ny)
    y = np.asarray(y2).reshape(lead + (ny,))
    return np.moveaxis(y, -1, axis), k_lo


def _axis_up(arr, start_ax, taps, offset, axis):
    """Adjoint of ``_axis_down``: out[2k + offset + t] += taps[t] * c[k]."""
    a = np.moveaxis(arr, axis, -1)
    lead = a.shape[:-1]
    N = a.shape[-1]
    B = int(np.prod(lead)) if lead else 1
    a2 = np.ascontiguousarray(a.reshape(B, N))
    out2 = np.asarray(up_batch(a2, np.ascontiguousarray(taps)))
    out = out2.reshape(lead + (out2.shape[-1],))
    return np.moveaxis(out, -1, axis), 2 * start_ax + offset


def _split_all(arr, start, bank):
    """Full one-level split into the 2**n tensor subbands."""
    items = {(): (arr, list(start))}
    for axis in range(arr.ndim):
        nxt = {}
        for lam, (a, st) in items.items():
            low, kl = _axis_down(a, st[axis], bank.lowpass, bank.offset, axis)
            stl = st.copy()
            stl[axis] = kl
            nxt[lam + (0,)] = (low, stl)
            high, kh = _axis_down(a, st[axis], bank.highpass, bank.offset,
                                  axis)
            sth = st.copy()
            sth[axis] = kh
            nxt[lam + (1,)] = (high, sth)
        items = nxt
    return {lam: (a, tuple(st)) for lam, (a, st) in items.items()}


def _low_only(arr, start, bank):
    st = list(start)
    for axis in range(arr.ndim):
        arr, kl = _axis_down(arr, st[axis], bank.lowpass, bank.offset, axis)
        st[axis] = kl
    return arr, tuple(st)


def _embed_array(arr, start, lo, shape):
    out = np.zeros(shape)
    sl = tuple(slice(s - l, s - l + d)
               for s, l, d in zip(start, lo, arr.shape))
    out[sl] = arr
    return out


def _align(subbands):
    """Embed all (array, start) pairs into their common bounding range."""
    n = len(next(iter(subbands.values()))[1])
    lo = [min(st[a] for _, st in subbands.values()) for a in range(n)]
    hi = [max(st[a] + arr.shape[a] for arr, st in subbands.values())
          for a in range(n)]
    shape = tuple(h - l for h, l in zip(hi, lo))
    return {lam: (_embed_array(arr, st, lo, shape), tuple(lo))
            for lam, (arr, st) in subbands.items()}


def _merge_up(subbands, bank):
    """One synthesis level: subbands (aligned layouts) to the finer scaling
    array.  Deterministic accumulation in sorted signature order."""
    total = None
    t_start = None
    for lam in sorted(subbands):
        arr, start = subbands[lam]
        st = list(start)
        for axis in range(arr.ndim):
            taps = bank.lowpass if lam[axis] == 0 else bank.highpass
            arr, s_new = _axis_up(arr, st[axis], taps, bank.offset, axis)
            st[axis] = s_new
        if total is None:
            total, t_start = arr, st
        else:
            total = total + arr
    return total, tuple(t_start)


def _densify(entries, n):
    if not entries:
        return None
    keys = sorted(entries)
    lo = [min(k[a] for k in keys) for a in range(n)]
    hi = [max(k[a] for k in keys) for a in range(n)]
    arr = np.zeros(tuple(h - l + 1 for h, l in zip(hi, lo)))
    for k in keys:
        arr[tuple(x - l for x, l in zip(k, lo))] = entries[k]
    return arr, tuple(lo)


def _sparsify(arr, start, sink, key_of):
    for pos in np.argwhere(arr != 0.0):
        k = tuple(int(p + s) for p, s in zip(pos, start))
        sink[key_of(k)] = float(arr[tuple(pos)])


def analyze(f: GridFunction, system: WaveletSystem, j_min: int,
            j_max: int) -> CoeffField:
    """Wavelet coefficients of grid samples for scales in [j_min, j_max),
    plus scaling coefficients at j_min.  Content finer than j_max is
    band-limited away; zero extension outside the box."""
    n = f.n
    K = f.K
    j_min, j_max = int(j_min), int(j_max)
    if j_max > K:
        raise GeometryError("j_max exceeds the grid resolution K")
    if j_max < j_min:
        raise GeometryError("empty scale range")
    # Zero extension makes the transform exact for any lattice-aligned box;
    # the declared coefficient box is the cube-aligned outward rounding.
    scale = 2.0 ** j_min
    box = tuple((np.floor(lo * scale) / scale, np.ceil(hi * scale) / scale)
                for lo, hi in zip(f.lo, f.hi))
    arr = f.values * 2.0 ** (-K * n / 2.0)
    cur = (arr, f.start_index())
    bank = system.bank
    for _ in range(K, j_max, -1):
        cur = _low_only(cur[0], cur[1], bank)
    wavelet = {}
    for j in range(j_max - 1, j_min - 1, -1):
        subs = _split_all(cur[0], cur[1], bank)
        for lam in sorted(subs):
            if not any(lam):
                continue
            a, st = subs[lam]
            _sparsify(a, st, wavelet, lambda k, j=j, lam=lam: (j, k, lam))
        cur = subs[(0,) * n]
    scaling = {}
    _sparsify(cur[0], cur[1], scaling, lambda k: k)
    return CoeffField(n, j_min, j_max, wavelet, scaling, box=box)


def _per_lam(bucket):
    out = {}
    for (k, lam), v in sorted(bucket.items()):
        out.setdefault(lam, {})[k] = v
    return out


def synthesize(c: CoeffField, system: WaveletSystem, K: int, lo=None,
               shape=None) -> GridFunction:
    """Level-K grid realization of the expansion.  With ``lo``/``shape``
    the result is embedded (zero-extended or cropped) into that frame."""
    K = int(K)
    n = c.n
    if K < c.j_max:
        raise PrecisionError("output resolution coarser than finest scale")
    bank = system.bank
    by_scale = c.by_scale()
    cur = _densify(c.scaling, n)
    for j in range(c.j_min, c.j_max):
        subs = {}
        if cur is not None:
            subs[(0,) * n] = cur
        for lam, entries in _per_lam(by_scale.get(j, {})).items():
            subs[lam] = _densify(entries, n)
        if not subs:
            cur = None
            continue
        cur = _merge_up(_align(subs), bank)
    if cur is None:
        frame = _empty_frame(c, K, lo, shape)
        return GridFunction(frame[0], K, np.zeros(frame[1]))
    for _ in range(c.j_max, K):
        arr, st = cur
        stl = list(st)
        for axis in range(n):
            arr, s_new = _axis_up(arr, stl[axis], bank.lowpass, bank.offset,
                                  axis)
            stl[axis] = s_new
        cur = (arr, tuple(stl))
    values = cur[0] * 2.0 ** (K * n / 2.0)
    gf = GridFunction.from_start_index(cur[1], K, values)
    if lo is not None:
        if shape is None:
            raise GeometryError("shape required together with lo")
        gf = gf.embed(tuple(float(x) for x in lo), tuple(shape))
    return gf


def _empty_frame(c, K, lo, shape):
    if lo is not None and shape is not None:
        return tuple(float(x) for x in lo), tuple(shape)
    if c.box is not None:
        lo = tuple(b[0] for b in c.box)
        shape = tuple(int(round((b[1] - b[0]) * 2.0 ** K)) for b in c.box)
        return lo, shape
    raise GeometryError("empty field needs an output frame or a box")


def scaling_ladder(c: CoeffField, system: WaveletSystem):
    """Dense scaling-coefficient arrays of the coarse projections, one per
    scale j in [j_min, j_max): everything below j re-expressed at level j."""
    bank = system.bank
    n = c.n
    by_scale = c.by_scale()
    ladder = {}
    cur = _densify(c.scaling, n)
    ladder[c.j_min] = cur
    for j in range(c.j_min, c.j_max - 1):
        subs = {}
        if cur is not None:
            subs[(0,) * n] = cur
        for lam, entries in _per_lam(by_scale.get(j, {})).items():
            subs[lam] = _densify(entries, n)
        cur = _merge_up(_align(subs), bank) if subs else None
        ladder[j + 1] = cur
    return ladder


def project_scales(c: CoeffField, system: WaveletSystem, j: int,
                   part: str) -> CoeffField:
    """Coarse (part="smooth") or detail (part="detail") projection.

    The smooth projection at level j re-expresses all coarser content as
    scaling coefficients at j; the detail projection extracts the wavelet
    entries at exactly scale j."""
    part = part.lower()
    if part in ("w", "detail", "q"):
        if not c.j_min <= j < c.j_max:
            raise RangeParameterError("detail scale outside field range")
        wav = {key: v for key, v in c.wavelet.items() if key[0] == j}
        return CoeffField(c.n, j, j + 1, wav, {}, box=c.box)
    if part not in ("v", "smooth", "p"):
        raise RangeParameterError(f"unknown projection part {part!r}")
    if not c.j_min <= j <= c.j_max:
        raise RangeParameterError("smooth scale outside field range")
    bank = system.bank
    n = c.n
    by_scale = c.by_scale()
    cur = _densify(c.scaling, n)
    for level in range(c.j_min, j):
        subs = {}
        if cur is not None:
            subs[(0,) * n] = cur
        for lam, entries in _per_lam(by_scale.get(level, {})).items():
            subs[lam] = _densify(entries, n)
        cur = _merge_up(_align(subs), bank) if subs else None
    scaling = {}
    if cur is not None:
        _sparsify(cur[0], cur[1], scaling, lambda k: k)
    return CoeffField(c.n, j, j, {}, scaling, box=c.box)


def tensor_sample(system: WaveletSystem, idx: TensorIndex,
                  K: int) -> GridFunction:
    """Grid realization of one tensor wavelet (L2-normalized)."""
    cube = idx.cube
    if K <= cube.j:
        raise PrecisionError("resolution too coarse for the requested scale")
    single = CoeffField(cube.n, cube.j, cube.j + 1,
                        {(cube.j, cube.k, idx.lam): 1.0}, {})
    return synthesize(single, system, K)


def scaling_sample(system: WaveletSystem, cube: DyadicCube,
                   K: int) -> GridFunction:
    """Grid realization of one scaling function (the all-zero signature)."""
    if K < cube.j:
        raise PrecisionError("resolution too coarse for the requested scale")
    single = CoeffField(cube.n, cube.j, cube.j, {}, {cube.k: 1.0})
    return synthesize(single, system, K)


def base_realization(system: WaveletSystem, rel: int, kind: str):
    """1D realization of the unit-scale generator on the step-2**-rel
    lattice, without the per-scale 2**(j/2) factor: (values, start index).

    Cached on the system; the arrays are shared read-only."""
    key = (int(rel), kind)
    cache = system._base_cache
    if key in cache:
        return cache[key]
    bank = system.bank
    if kind == "phi":
        arr = np.array([1.0])
        start = 0
        levels = rel
    elif kind == "psi":
        if rel < 1:
            raise PrecisionError("wavelet realization needs rel >= 1")
        arr, start = _axis_up(np.array([1.0]), 0, bank.highpass, bank.offset,
                              0)
        levels = rel - 1
    else:
        raise RangeParameterError(f"unknown generator kind {kind!r}")
    for _ in range(levels):
        arr, start = _axis_up(arr, start, bank.lowpass, bank.offset, 0)
    arr = np.ascontiguousarray(arr * 2.0 ** (rel / 2.0))
    arr.flags.writeable = False
    cache[key] = (arr, start)
    return cache[key]
