"""Core data types: dyadic cubes, tensor wavelet indices, grid functions on
uniform dyadic lattices, and sparse coefficient fields.

Conventions used throughout the package:

* Scales grow toward finer resolution: a cube at scale ``j`` has side
  ``2**-j`` and lower-left corner ``2**-j * k``.
* A ``GridFunction`` samples a function at the left-closed lattice
  ``lo + i * 2**-K`` (the sample at the upper box edge is excluded).
  Quadrature is the plain lattice sum times the cell volume, which agrees
  with the trapezoid rule whenever the samples vanish at the box edge and is
  exact for left-continuous piecewise-constant data.
* All values are immutable after construction and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

__all__ = [
    "DyadicCube",
    "TensorIndex",
    "GridFunction",
    "CoeffField",
]


@dataclass(frozen=True)
class DyadicCube:
    """Cube of side 2**-j with lower-left corner 2**-j * k."""

    j: int
    k: tuple

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))

    @property
    def n(self):
        return len(self.k)

    @property
    def side(self):
        return 2.0 ** (-self.j)

    @property
    def volume(self):
        return 2.0 ** (-self.j * self.n)

    @property
    def corner(self):
        return np.array(self.k, dtype=float) * self.side

    @property
    def center(self):
        return (np.array(self.k, dtype=float) + 0.5) * self.side

    def parent(self):
        return DyadicCube(self.j - 1, tuple(x >> 1 for x in self.k))

    def contains(self, other: "DyadicCube") -> bool:
        """Dyadic containment other ⊆ self (requires other at same or finer scale)."""
        if other.j < self.j:
            return False
        shift = other.j - self.j
        return all((ko >> shift) == ks for ko, ks in zip(other.k, self.k))

    def dilated_bounds(self, factor: float):
        """Bounds of the factor-dilation about the cube center."""
        half = 0.5 * factor * self.side
        c = self.center
        return c - half, c + half


@dataclass(frozen=True)
class TensorIndex:
    """A dyadic cube together with the tensor signature selecting, per axis,
    the scaling (0) or wavelet (1) factor.  The all-zero signature is the
    pure scaling function and is not a valid wavelet index."""

    cube: DyadicCube
    lam: tuple

    def __post_init__(self):
        lam = tuple(int(x) for x in self.lam)
        if len(lam) != self.cube.n:
            raise GeometryError("tensor signature length must match dimension")
        if any(x not in (0, 1) for x in lam):
            raise GeometryError("tensor signature entries must be 0 or 1")
        if not any(lam):
            raise GeometryError("tensor signature must not be all zero")
        object.__setattr__(self, "lam", lam)


class GridFunction:
    """Real samples on a uniform lattice of step 2**-K over an axis-aligned
    box with dyadic corners."""

    __slots__ = ("lo", "K", "values")

    def __init__(self, lo, K, values):
        values = np.asarray(values, dtype=float)
        lo = tuple(float(x) for x in lo)
        if values.ndim != len(lo):
            raise GeometryError("value array rank must match box dimension")
        scale = 2.0 ** int(K)
        for x in lo:
            if abs(x * scale - round(x * scale)) > 1e-9:
                raise GeometryError("box corners must be multiples of 2**-K")
        self.lo = lo
        self.K = int(K)
        self.values = values

    # -- geometry -----------------------------------------------------------

    @property
    def n(self):
        return len(self.lo)

    @property
    def h(self):
        return 2.0 ** (-self.K)

    @property
    def shape(self):
        return self.values.shape

    @property
    def hi(self):
        return tuple(l + s * self.h for l, s in zip(self.lo, self.shape))

    def start_index(self):
        """Integer lattice coordinates of the lower corner."""
        scale = 2.0 ** self.K
        return tuple(int(round(x * scale)) for x in self.lo)

    @classmethod
    def from_start_index(cls, start, K, values):
        h = 2.0 ** (-int(K))
        return cls(tuple(s * h for s in start), K, values)

    @classmethod
    def zeros(cls, lo, K, shape):
        return cls(lo, K, np.zeros(shape))

    def axis_coords(self, axis):
        return self.lo[axis] + self.h * np.arange(self.shape[axis])

    def meshgrid(self):
        return np.meshgrid(*(self.axis_coords(a) for a in range(self.n)),
                           indexing="ij")

    # -- calculus ------------------------------------------------------------

    def quadrature(self):
        return float(self.values.sum() * self.h ** self.n)

    def max_abs(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def l2_norm(self):
        return float(np.sqrt(np.sum(self.values ** 2) * self.h ** self.n))

    # -- algebra -------------------------------------------------------------

    def _check_layout(self, other):
        if (self.K != other.K or self.shape != other.shape
                or self.start_index() != other.start_index()):
            raise GeometryError("grid layouts differ")

    def __add__(self, other):
        self._check_layout(other)
        return GridFunction(self.lo, self.K, self.values + other.values)

    def __sub__(self, other):
        self._check_layout(other)
        return GridFunction(self.lo, self.K, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_layout(other)
            return GridFunction(self.lo, self.K, self.values * other.values)
        return GridFunction(self.lo, self.K, self.values * float(other))

    __rmul__ = __mul__

    def restrict(self, lo, hi):
        """Restriction to a sub-box (corners must lie on the lattice)."""
        start = self.start_index()
        scale = 2.0 ** self.K
        sl = []
        for a in range(self.n):
            i0 = int(round(lo[a] * scale)) - start[a]
            i1 = int(round(hi[a] * scale)) - start[a]
            if i0 < 0 or i1 > self.shape[a] or i1 <= i0:
                raise GeometryError("restriction box exceeds grid")
            sl.append(slice(i0, i1))
        return GridFunction(tuple(lo), self.K, self.values[tuple(sl)])

    def embed(self, lo, shape):
        """Zero-extension onto a larger frame with the given corner/shape."""
        scale = 2.0 ** self.K
        start = self.start_index()
        out = np.zeros(shape)
        sl_out, sl_in = [], []
        for a in range(self.n):
            off = start[a] - int(round(lo[a] * scale))
            i0 = max(0, off)
            i1 = min(shape[a], off + self.shape[a])
            if i1 <= i0:
                return GridFunction(lo, self.K, out)
            sl_out.append(slice(i0, i1))
            sl_in.append(slice(i0 - off, i1 - off))
        out[tuple(sl_out)] = self.values[tuple(sl_in)]
        return GridFunction(tuple(lo), self.K, out)

    # -- i/o -----------------------------------------------------------------

    def save_csv(self, path):
        with open(path, "w") as fh:
            box = ";".join(f"{l!r}:{u!r}" for l, u in zip(self.lo, self.hi))
            fh.write(f"# grid n={self.n} K={self.K} box={box}\n")
            for v in self.values.reshape(-1):
                fh.write(f"{float(v)!r}\n")

    @classmethod
    def load_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip()
            vals = np.array([float(line) for line in fh if line.strip()])
        fields = dict(tok.split("=", 1) for tok in header.lstrip("# ").split()
                      if "=" in tok)
        K = int(fields["K"])
        bounds = [tuple(float(x) for x in b.split(":"))
                  for b in fields["box"].split(";")]
        lo = tuple(b[0] for b in bounds)
        shape = tuple(int(round((b[1] - b[0]) * 2.0 ** K)) for b in bounds)
        return cls(lo, K, vals.reshape(shape))

    def save_npz(self, path):
        np.savez(path, lo=np.array(self.lo), K=np.array(self.K),
                 values=self.values)

    @classmethod
    def load_npz(cls, path):
        data = np.load(path)
        return cls(tuple(data["lo"]), int(data["K"]), data["values"])


class CoeffField:
    """Finite wavelet expansion: a sparse map (scale, corner, signature) →
    coefficient, plus scaling coefficients at the coarsest scale.

    Wavelet scales live in ``[j_min, j_max)``; the scaling part sits at
    ``j_min``.  Instances are treated as immutable."""

    __slots__ = ("n", "j_min", "j_max", "wavelet", "scaling", "box",
                 "_by_scale")

    def __init__(self, n, j_min, j_max, wavelet=None, scaling=None, box=None):
        if j_max < j_min:
            raise GeometryError("scale range is empty the wrong way")
        self.n = int(n)
        self.j_min = int(j_min)
        self.j_max = int(j_max)
        self.wavelet = dict(wavelet or {})
        self.scaling = dict(scaling or {})
        self.box = None if box is None else tuple(
            (float(a), float(b)) for a, b in box)
        self._by_scale = None
        for (j, k, lam) in self.wavelet:
            if not (self.j_min <= j < self.j_max):
                raise GeometryError(f"wavelet scale {j} outside range")
            if len(k) != self.n or len(lam) != self.n or not any(lam):
                raise GeometryError("malformed wavelet key")

    # -- views ---------------------------------------------------------------

    @property
    def num_entries(self):
        return len(self.wavelet) + len(self.scaling)

    def by_scale(self):
        """Cached per-scale buckets {j: {(k, lam): value}}."""
        if self._by_scale is None:
            buckets = {}
            for (j, k, lam), v in self.wavelet.items():
                buckets.setdefault(j, {})[(k, lam)] = v
            self._by_scale = buckets
        return self._by_scale

    def sorted_wavelet_items(self):
        return sorted(self.wavelet.items())

    def sorted_scaling_items(self):
        return sorted(self.scaling.items())

    def l2_norm(self):
        total = sum(v * v for v in self.wavelet.values())
        total += sum(v * v for v in self.scaling.values())
        return float(np.sqrt(total))

    def scaled(self, alpha):
        return CoeffField(
            self.n, self.j_min, self.j_max,
            {k: alpha * v for k, v in self.wavelet.items()},
            {k: alpha * v for k, v in self.scaling.items()},
            box=self.box)

    def plus(self, other):
        if (self.n, self.j_min, self.j_max) != (other.n, other.j_min,
                                                other.j_max):
            raise GeometryError("coefficient fields have different layouts")
        wav = dict(self.wavelet)
        for key, v in other.wavelet.items():
            wav[key] = wav.get(key, 0.0) + v
        sca = dict(self.scaling)
        for key, v in other.scaling.items():
            sca[key] = sca.get(key, 0.0) + v
        return CoeffField(self.n, self.j_min, self.j_max, wav, sca,
                          box=self.box)

    def restrict_scales(self, j_min, j_max):
        if j_min < self.j_min or j_max > self.j_max:
            raise GeometryError("requested scales exceed stored range")
        if j_min != self.j_min:
            scaling = {}
        else:
            scaling = dict(self.scaling)
        wav = {key: v for key, v in self.wavelet.items()
               if j_min <= key[0] < j_max}
        return CoeffField(self.n, j_min, j_max, wav, scaling, box=self.box)

    # -- i/o -----------------------------------------------------------------

    def save_jsonl(self, path):
        with open(path, "w") as fh:
            meta = {"n": self.n, "j_min": self.j_min, "j_max": self.j_max}
            if self.box is not None:
                meta["box"] = [list(b) for b in self.box]
            fh.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
            for k, v in self.sorted_scaling_items():
                rec = {"j": self.j_min, "k": list(k), "lambda": "scaling",
                       "value": v}
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
            for (j, k, lam), v in self.sorted_wavelet_items():
                rec = {"j": j, "k": list(k), "lambda": list(lam), "value": v}
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    @classmethod
    def load_jsonl(cls, path):
        wavelet, scaling = {}, {}
        meta = None
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if "meta" in rec:
                    meta = rec["meta"]
                    continue
                k = tuple(int(x) for x in rec["k"])
                if rec["lambda"] == "scaling":
                    scaling[k] = float(rec["value"])
                else:
                    lam = tuple(int(x) for x in rec["lambda"])
                    wavelet[(int(rec["j"]), k, lam)] = float(rec["value"])
        if meta is None:
            raise GeometryError("missing metadata record")
        box = meta.get("box")
        return cls(meta["n"], meta["j_min"], meta["j_max"], wavelet, scaling,
                   box=None if box is None else [tuple(b) for b in box])
