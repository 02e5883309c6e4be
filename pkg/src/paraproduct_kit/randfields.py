"""Deterministic cross-platform random coefficient fields.

The generator is the 64-bit linear congruential recurrence

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64

seeded directly with the configured integer; each draw returns
``(state >> 11) * 2**-53`` in [0, 1).  Field entries are drawn in a fixed
documented order (scale, then corner per axis, then signature, then
amplitude), so identical seeds reproduce identical fields bit for bit on
any IEEE-754 platform and in any language implementing the same
recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import CoeffField, GridFunction

__all__ = ["Lcg64", "FieldSpec", "random_field", "random_torus_function",
           "lipschitz_sample"]

_MULT = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    """The documented 64-bit linear generator."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_uint(self) -> int:
        self.state = (_MULT * self.state + _INC) & _MASK
        return self.state

    def next_unit(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_uint() >> 11) * (2.0 ** -53)

    def next_index(self, count: int) -> int:
        return int(self.next_unit() * count)


@dataclass(frozen=True)
class FieldSpec:
    """Shape of a random field draw.

    ``entries`` keys are drawn uniformly; colliding keys accumulate.
    ``amplitude_decay`` scales amplitudes by 2**(-decay * (j - j_min)).
    """

    n: int = 1
    j_min: int = 0
    j_max: int = 5
    entries: int = 100
    box: tuple = ((0.0, 4.0),)
    amplitude_decay: float = 0.0
    scaling_entries: int = 0

    def __post_init__(self):
        object.__setattr__(self, "box",
                           tuple((float(a), float(b)) for a, b in self.box))


def random_field(seed: int, spec: FieldSpec) -> CoeffField:
    """Draw a coefficient field.  Per entry, in order: scale j uniform on
    [j_min, j_max); corner index per axis uniform over the box cubes at
    scale j; signature uniform over the nonzero tensor signatures; amplitude
    uniform on [-1, 1) times the decay factor."""
    gen = Lcg64(seed)
    n = spec.n
    n_scales = spec.j_max - spec.j_min
    wavelet = {}
    if n_scales > 0:
        for _ in range(spec.entries):
            j = spec.j_min + gen.next_index(n_scales)
            k = []
            for a in range(n):
                lo, hi = spec.box[a]
                count = max(1, int(round((hi - lo) * 2.0 ** j)))
                k.append(int(round(lo * 2.0 ** j)) + gen.next_index(count))
            sig_index = 1 + gen.next_index(2 ** n - 1)
            lam = tuple((sig_index >> a) & 1 for a in range(n))
            amp = (2.0 * gen.next_unit() - 1.0) \
                * 2.0 ** (-spec.amplitude_decay * (j - spec.j_min))
            key = (j, tuple(k), lam)
            wavelet[key] = wavelet.get(key, 0.0) + amp
    scaling = {}
    for _ in range(spec.scaling_entries):
        k = []
        for a in range(n):
            lo, hi = spec.box[a]
            count = max(1, int(round((hi - lo) * 2.0 ** spec.j_min)))
            k.append(int(round(lo * 2.0 ** spec.j_min))
                     + gen.next_index(count))
        amp = 2.0 * gen.next_unit() - 1.0
        key = tuple(k)
        scaling[key] = scaling.get(key, 0.0) + amp
    return CoeffField(n, spec.j_min, spec.j_max, wavelet, scaling,
                      box=spec.box)


def random_torus_function(gen: Lcg64, K: int, n: int, kmax: int = 8,
                          decay: float = 1.0) -> GridFunction:
    """Zero-mean band-limited function on the unit torus.

    Fourier modes are drawn in lexicographic order over the half-space of
    wave vectors with |k_i| <= kmax (the zero mode stays empty); per mode
    the real and imaginary amplitudes are uniform on [-1, 1) scaled by
    (1 + |k|)**-decay."""
    N = 2 ** int(K)
    spec = np.zeros((N,) * n, dtype=complex)
    ranges = [range(-kmax, kmax + 1) for _ in range(n)]
    import itertools

    for kvec in itertools.product(*ranges):
        if all(x == 0 for x in kvec):
            continue
        # keep one representative per conjugate pair
        lead = next(x for x in kvec if x != 0)
        if lead < 0:
            continue
        mag = (1.0 + math.sqrt(sum(x * x for x in kvec))) ** (-decay)
        a = (2.0 * gen.next_unit() - 1.0) * mag
        b = (2.0 * gen.next_unit() - 1.0) * mag
        idx = tuple(x % N for x in kvec)
        cidx = tuple((-x) % N for x in kvec)
        spec[idx] += 0.5 * (a - 1j * b)
        spec[cidx] += 0.5 * (a + 1j * b)
    vals = np.fft.ifftn(spec).real * N ** n
    lo = (0.0,) * n
    return GridFunction(lo, K, vals)


def lipschitz_sample(gen: Lcg64, box, K: int, alpha: float) -> GridFunction:
    """1D Hoelder-class sample: two absolute-power kinks plus a smooth wave
    and a linear drift, coefficients uniform on [-1, 1)."""
    lo, hi = float(box[0]), float(box[1])
    side = hi - lo
    x = lo + 2.0 ** (-K) * np.arange(int(round(side * 2 ** K)))
    a0 = 2.0 * gen.next_unit() - 1.0
    c0 = lo + side * (0.25 + 0.5 * gen.next_unit())
    a1 = 2.0 * gen.next_unit() - 1.0
    c1 = lo + side * (0.25 + 0.5 * gen.next_unit())
    a2 = 2.0 * gen.next_unit() - 1.0
    freq = 1 + gen.next_index(4)
    a3 = 2.0 * gen.next_unit() - 1.0
    vals = (a0 * np.abs(x - c0) ** alpha + a1 * np.abs(x - c1) ** alpha
            + a2 * np.cos(2.0 * math.pi * freq * (x - lo) / side)
            + a3 * (x - lo) / side)
    return GridFunction((lo,), K, vals)
