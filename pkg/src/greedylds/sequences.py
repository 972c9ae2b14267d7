"""Classical comparison sequences: Kronecker, (permuted) van der Corput, Sobol'."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .core import PointSet

__all__ = [
    "GOLDEN_RATIO",
    "KroneckerSpec",
    "SobolSpec",
    "VdcSpec",
    "kronecker",
    "niederreiter_set",
    "read_permutations",
    "sobol",
    "van_der_corput",
]

GOLDEN_RATIO = (1.0 + 5.0 ** 0.5) / 2.0
_ONE_MINUS = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class KroneckerSpec:
    alpha: float = GOLDEN_RATIO
    start_index: int = 1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.start_index < 0:
            raise ValueError("start_index must be >= 0")


def kronecker(spec: KroneckerSpec, count: int) -> PointSet:
    """``frac(k * alpha)`` for k = start_index, ..., start_index + count - 1.

    ``start_index=0`` puts the origin first, as when the rotation is drawn
    starting from angle zero on the circle.

    ``alpha`` is taken as the exact binary fraction it stores, and the
    fractional part is formed in integer arithmetic, so the only error is the
    final rounding to double.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    num, den = float(spec.alpha).as_integer_ratio()
    k0 = spec.start_index
    out = np.fromiter(((k * num % den) / den for k in range(k0, k0 + count)),
                      dtype=np.float64, count=count)
    np.minimum(out, _ONE_MINUS, out=out)
    return PointSet(out, 1)


@dataclass(frozen=True)
class VdcSpec:
    """Base-b radical inverse with per-digit-position permutations.

    ``permutations[j]`` acts on the digit of weight ``b^j``; the list is
    reused cyclically when an index has more digits than permutations.
    """

    base: int = 2
    permutations: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        perms = tuple(tuple(int(v) for v in p) for p in self.permutations)
        if not perms:
            perms = (tuple(range(self.base)),)
        for j, p in enumerate(perms):
            if sorted(p) != list(range(self.base)):
                raise ValueError(f"permutation {j} is not a bijection on 0..{self.base - 1}: {p}")
        object.__setattr__(self, "permutations", perms)


def read_permutations(path: str | os.PathLike) -> tuple[tuple[int, ...], ...]:
    """One permutation per line as space-separated images; ``#`` lines skipped."""
    perms = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                perms.append(tuple(int(t) for t in line.split()))
    if not perms:
        raise ValueError(f"{path}: no permutations found")
    return tuple(perms)


def _radical_inverse(i: int, base: int, perms: tuple[tuple[int, ...], ...]) -> float:
    # only the digits of i are permuted (leading zeros are not)
    num = 0
    den = 1
    j = 0
    while i:
        i, a = divmod(i, base)
        num = num * base + perms[j % len(perms)][a]
        den *= base
        j += 1
    return num / den


def van_der_corput(spec: VdcSpec, count: int) -> PointSet:
    """Elements i = 1, ..., count: ``sum_j pi_j(a_j) b^(-j-1)`` for ``i = sum_j a_j b^j``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    vals = np.fromiter((_radical_inverse(i, spec.base, spec.permutations)
                        for i in range(1, count + 1)), dtype=np.float64, count=count)
    np.minimum(vals, _ONE_MINUS, out=vals)
    return PointSet(vals, 1)


# Direction numbers: (degree, coefficient bits a, initial m) per dimension.
# Dimension 1 is the identity (van der Corput); 2 uses x + 1; 3 uses x^2 + x + 1.
_SOBOL_TABLE = (
    None,
    (1, 0, (1,)),
    (2, 1, (1, 3)),
)
_SOBOL_BITS = 52


def _direction_numbers(dim: int, bits: int = _SOBOL_BITS) -> np.ndarray:
    """Integers v_k = m_k << (bits - k), k = 1..bits."""
    v = np.zeros(bits + 1, dtype=np.uint64)
    if _SOBOL_TABLE[dim] is None:
        for k in range(1, bits + 1):
            v[k] = 1 << (bits - k)
        return v
    s, a, m_init = _SOBOL_TABLE[dim]
    m = [0] + list(m_init)
    for k in range(s + 1, bits + 1):
        new = m[k - s] ^ (m[k - s] << s)
        for r in range(1, s):
            if (a >> (s - 1 - r)) & 1:
                new ^= m[k - r] << r
        m.append(new)
    for k in range(1, bits + 1):
        v[k] = m[k] << (bits - k)
    return v


@dataclass(frozen=True)
class SobolSpec:
    d: int = 2
    skip_zero: bool = False

    def __post_init__(self):
        if not 1 <= self.d <= 3:
            raise ValueError(f"Sobol' supports d in {{1, 2, 3}}, got d={self.d}")


def sobol(spec: SobolSpec, count: int) -> PointSet:
    """Unscrambled binary Sobol' points in natural (not Gray-code) index order.

    Point i is the XOR of the direction numbers selected by the bits of i, so
    the first coordinate is exactly the base-2 van der Corput sequence.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    start = 1 if spec.skip_zero else 0
    idx = np.arange(start, start + count, dtype=np.uint64)
    if int(idx[-1]) >= 1 << _SOBOL_BITS:
        raise ValueError("index range exceeds the direction-number precision")
    out = np.empty((count, spec.d))
    scale = 2.0 ** -_SOBOL_BITS
    for dim in range(spec.d):
        v = _direction_numbers(dim)
        acc = np.zeros(count, dtype=np.uint64)
        k = 1
        rest = idx.copy()
        while rest.any():
            acc ^= np.where(rest & np.uint64(1), v[k], np.uint64(0))
            rest >>= np.uint64(1)
            k += 1
        out[:, dim] = acc.astype(np.float64) * scale
    return PointSet(out, spec.d)


def niederreiter_set(n: int) -> PointSet:
    """The optimal n-point set ``{(2i+1)/(2n)}``, discrepancy exactly 1/(2n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return PointSet((2.0 * np.arange(n) + 1.0) / (2.0 * n), 1)
