"""Atoms and finite atomic decomposition.

An atom is a finite detail expansion on the subcubes of one dyadic cube,
normalized so the squared-coefficient norm meets the size bound of its
support cube.  The decomposition routine splits any finite detail
expansion into such atoms by the stopping-time construction on the square
function: entries are graded by the dyadic level sets where the square
function exceeds powers of two, then grouped under maximal cubes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .fields import CoeffField, DyadicCube, GridFunction
from .norms import square_function
from .transform import synthesize
from .wavelets import WaveletSystem, moment_integral

__all__ = [
    "Atom",
    "atom_verify",
    "finite_atomic_decompose",
    "save_atoms_jsonl",
    "load_atoms_jsonl",
]


@dataclass(frozen=True)
class Atom:
    """Detail expansion on the dyadic subcubes of ``cube``.

    ``support_dilation`` declares how far the realization may spill beyond
    the cube: the size bound and the support scan use the dilated cube.
    With the indicator system the dilation is 1 and the bounds are tight.
    """

    coeffs: CoeffField
    cube: DyadicCube
    p: float
    support_dilation: float = 1.0

    @property
    def moment_order(self) -> int:
        n = self.cube.n
        return int(math.floor(n * (1.0 / self.p - 1.0)))

    @property
    def size_bound(self) -> float:
        vol = (self.support_dilation ** self.cube.n) * self.cube.volume
        return vol ** (0.5 - 1.0 / self.p)

    def l2_norm(self) -> float:
        return self.coeffs.l2_norm()

    def realize(self, system: WaveletSystem, K: int,
                frame=None) -> GridFunction:
        lo = shape = None
        if frame is not None:
            lo, shape = frame
        return synthesize(self.coeffs, system, K, lo=lo, shape=shape)


def atom_verify(atom: Atom, system: WaveletSystem, K: int | None = None,
                enlarge: float | None = None, moment_tol: float = 1e-8,
                support_tol: float = 1e-12) -> dict:
    """Check support containment, the squared-norm size bound, and the
    vanishing moments of an atom; returns per-check residuals.

    ``enlarge`` overrides the dilation factor of the cube used for the
    support scan and the size bound (defaults to the atom's declared
    dilation)."""
    cube = atom.cube
    n = cube.n
    factor = atom.support_dilation if enlarge is None else float(enlarge)
    if K is None:
        K = max(atom.coeffs.j_max + 3, cube.j + 3)
    real = atom.realize(system, K)
    lo_b, hi_b = cube.dilated_bounds(factor)

    vals = real.values
    scale_ref = max(1.0, float(np.max(np.abs(vals))) if vals.size else 0.0)
    nz = np.argwhere(np.abs(vals) > support_tol * scale_ref)
    support_ok = True
    support_excess = 0.0
    if nz.size:
        start = real.start_index()
        h = real.h
        for a in range(n):
            x0 = (nz[:, a].min() + start[a]) * h
            x1 = (nz[:, a].max() + 1 + start[a]) * h
            excess = max(lo_b[a] - x0, x1 - hi_b[a], 0.0)
            support_excess = max(support_excess, excess)
            if excess > h:
                support_ok = False

    l2 = atom.l2_norm()
    vol = (factor ** n) * cube.volume
    bound = vol ** (0.5 - 1.0 / atom.p)
    l2_ok = l2 <= bound * (1.0 + 1e-10)

    moment_residuals = {}
    moments_ok = True
    if n == 1:
        for order in range(atom.moment_order + 1):
            resid = moment_integral(real, order)
            moment_residuals[order] = resid
            if abs(resid) > moment_tol * max(1.0, l2):
                moments_ok = False
    else:
        mesh = real.meshgrid()
        for order in range(atom.moment_order + 1):
            if order == 0:
                resid = real.quadrature()
                moment_residuals[0] = resid
            else:
                worst = 0.0
                for a in range(n):
                    worst = max(worst, abs(float(
                        np.sum(mesh[a] ** order * vals) * real.h ** n)))
                resid = worst
                moment_residuals[order] = resid
            if abs(resid) > moment_tol * max(1.0, l2):
                moments_ok = False

    return {
        "passed": support_ok and l2_ok and moments_ok,
        "support_ok": support_ok,
        "support_excess": support_excess,
        "l2": l2,
        "l2_bound": bound,
        "l2_ok": l2_ok,
        "moments_ok": moments_ok,
        "moment_residuals": moment_residuals,
        "dilation": factor,
    }


def _ancestor(k, j, j_up):
    shift = j - j_up
    return tuple(x >> shift for x in k)


def finite_atomic_decompose(f: CoeffField, p: float,
                            support_dilation: float = 1.0,
                            K: int | None = None):
    """Split a finite detail expansion into atoms with p-summable weights.

    Stopping-time construction: grade each entry by the last threshold 2**t
    at which the square function exceeds 2**t on more than half of the
    entry's cube, then group the grade-t entries under the maximal dyadic
    cubes carrying that level set.  Atom coefficients are extracted from f
    unchanged, so the weighted sum of atoms reproduces f exactly.

    Returns a list of (weight, Atom); the sum of weight * atom equals f
    entrywise, every atom meets its size bound by construction, and
    (sum of weight**p)**(1/p) serves as the reported decomposition mass.
    """
    if f.scaling:
        raise PreconditionError("decomposition expects a pure detail field")
    if not f.wavelet:
        return []
    n = f.n
    if K is None:
        K = f.j_max
    sq = square_function(f, K=K)
    vals = sq.values
    start = sq.start_index()

    # per-scale occupancy fractions of the threshold level sets
    sup = float(vals.max())
    if sup <= 0.0:
        return []
    t_hi = int(math.ceil(math.log2(sup)))
    t_lo = t_hi - 60  # entries below this grade collapse into one bucket

    def fraction_above(j, k, thresh):
        """Fraction of cube (j, k) where the square function exceeds
        ``thresh`` (cube assumed inside the rasterized frame)."""
        b = 1 << (K - j)
        sl = []
        for a in range(n):
            s = k[a] * b - start[a]
            s0 = max(s, 0)
            s1 = min(s + b, vals.shape[a])
            if s1 <= s0:
                return 0.0
            sl.append(slice(s0, s1))
        block = vals[tuple(sl)]
        return float(np.count_nonzero(block > thresh)) / b ** n

    graded = {}
    for key in f.sorted_wavelet_items():
        (j, k, lam), v = key
        t = t_hi
        while t > t_lo and fraction_above(j, k, 2.0 ** t) <= 0.5:
            t -= 1
        graded.setdefault(t, []).append((j, k, lam, v))

    out = []
    for t in sorted(graded, reverse=True):
        entries = graded[t]
        thresh = 2.0 ** t
        # maximal dyadic cubes: ascend while the parent still carries the
        # level set on more than half its volume
        roots = {}
        for (j, k, lam, v) in entries:
            cj, ck = j, k
            while True:
                pj, pk = cj - 1, tuple(x >> 1 for x in ck)
                if pj < f.j_min - 40:
                    break
                if fraction_above(pj, pk, thresh) > 0.5:
                    cj, ck = pj, pk
                else:
                    break
            roots.setdefault((cj, ck), []).append((j, k, lam, v))
        for (rj, rk), group in sorted(roots.items()):
            cube = DyadicCube(rj, rk)
            coeff_norm = math.sqrt(sum(v * v for (_, _, _, v) in group))
            if coeff_norm == 0.0:
                continue
            vol = (support_dilation ** n) * cube.volume
            bound = vol ** (0.5 - 1.0 / p)
            weight = coeff_norm / bound
            wav = {(j, k, lam): v / weight for (j, k, lam, v) in group}
            coeffs = CoeffField(n, f.j_min, f.j_max, wav, {}, box=f.box)
            out.append((weight, Atom(coeffs, cube, p, support_dilation)))
    return out


def save_atoms_jsonl(pairs, path):
    """One record per atom: weight, cube, and the coefficient entries."""
    with open(path, "w") as fh:
        for weight, atom in pairs:
            rec = {
                "weight": weight,
                "cube": {"j": atom.cube.j, "k": list(atom.cube.k)},
                "p": atom.p,
                "support_dilation": atom.support_dilation,
                "entries": [
                    {"j": j, "k": list(k), "lambda": list(lam), "value": v}
                    for (j, k, lam), v in atom.coeffs.sorted_wavelet_items()
                ],
                "j_range": [atom.coeffs.j_min, atom.coeffs.j_max],
                "n": atom.cube.n,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_atoms_jsonl(path):
    pairs = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            wav = {(e["j"], tuple(e["k"]), tuple(e["lambda"])): e["value"]
                   for e in rec["entries"]}
            coeffs = CoeffField(rec["n"], rec["j_range"][0],
                                rec["j_range"][1], wav, {})
            cube = DyadicCube(rec["cube"]["j"], tuple(rec["cube"]["k"]))
            pairs.append((rec["weight"],
                          Atom(coeffs, cube, rec["p"],
                               rec["support_dilation"])))
    return pairs
