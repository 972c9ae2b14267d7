"""Star discrepancy: exact L-infinity (d <= 3), lattice lower bound, Warnock L2.

The exact value uses the critical-box reduction: every coordinate of the
supremum's box can be taken from the point coordinates or 1.  At each corner
we check the open-box deficit ``vol - #{x < q}/n`` and the closed-box excess
``#{x <= q}/n - vol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import PointSet

__all__ = [
    "CriticalGrid",
    "DiscrepancyValue",
    "Kind",
    "critical_grid",
    "l2_star_warnock",
    "linf_star",
    "linf_star_1d",
    "linf_star_exact",
    "linf_star_sampled",
    "local_discrepancy",
]


class Kind(str, Enum):
    LINF_EXACT = "linf_exact"
    LINF_LOWER_BOUND = "linf_lower_bound"
    L2_SQUARED = "l2_squared"


@dataclass(frozen=True)
class DiscrepancyValue:
    value: float
    kind: Kind
    n: int
    d: int

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class CriticalGrid:
    """Per-dimension sorted unique coordinates, each list ending with 1."""

    axes: tuple[np.ndarray, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)


def _coords(ps) -> np.ndarray:
    if isinstance(ps, PointSet):
        return ps.coords
    arr = np.asarray(ps, dtype=np.float64)
    return arr.reshape(-1, 1) if arr.ndim == 1 else arr


def critical_grid(ps) -> CriticalGrid:
    x = _coords(ps)
    return CriticalGrid(tuple(np.union1d(x[:, k], [1.0]) for k in range(x.shape[1])))


def linf_star_1d(ps) -> DiscrepancyValue:
    """Closed form ``max_i max(i/n - x_(i), x_(i) - (i-1)/n)`` over sorted points."""
    x = _coords(ps)
    if x.shape[1] != 1:
        raise ValueError(f"expected d=1, got d={x.shape[1]}")
    n = x.shape[0]
    if n == 0:
        raise ValueError("discrepancy of an empty set is undefined")
    xs = np.sort(x[:, 0])
    i = np.arange(1, n + 1)
    value = float(max((i / n - xs).max(), (xs - (i - 1) / n).max()))
    return DiscrepancyValue(value, Kind.LINF_EXACT, n, 1)


def _corner_extremes(x: np.ndarray, axes: tuple[np.ndarray, ...]) -> float:
    """max over grid corners q of max(vol(q) - open(q)/n, closed(q)/n - vol(q)).

    Runs slab by slab along axis 0, carrying cumulative (d-1)-dimensional
    count layers, so memory stays O(prod of the other axis sizes).
    """
    n, d = x.shape
    # index of the first grid value >= x (closed) and > x (open), per axis
    closed_idx = np.stack([np.searchsorted(axes[k], x[:, k], side="left")
                           for k in range(d)], axis=1)
    open_idx = np.stack([np.searchsorted(axes[k], x[:, k], side="right")
                         for k in range(d)], axis=1)
    if d == 1:
        g = axes[0]
        closed = np.cumsum(np.bincount(closed_idx[:, 0], minlength=g.size)[: g.size])
        opened = np.cumsum(np.bincount(open_idx[:, 0], minlength=g.size)[: g.size])
        return float(max((g - opened / n).max(), (closed / n - g).max()))

    rest_shape = tuple(a.size for a in axes[1:])
    rest_vol = axes[1]
    for a in axes[2:]:
        rest_vol = np.multiply.outer(rest_vol, a)

    def by_slab(idx):
        return idx[np.argsort(idx[:, 0], kind="stable")]

    # every coordinate is < 1 and 1 is on every axis, so indices stay in range
    c_idx = by_slab(closed_idx)
    o_idx = by_slab(open_idx)
    c_layer = np.zeros(rest_shape, dtype=np.int64)
    o_layer = np.zeros(rest_shape, dtype=np.int64)
    c_pos = o_pos = 0
    best = 0.0
    for a, qa in enumerate(axes[0]):
        c_new = np.zeros(rest_shape, dtype=np.int64)
        while c_pos < n and c_idx[c_pos, 0] == a:
            c_new[tuple(c_idx[c_pos, 1:])] += 1
            c_pos += 1
        o_new = np.zeros(rest_shape, dtype=np.int64)
        while o_pos < n and o_idx[o_pos, 0] == a:
            o_new[tuple(o_idx[o_pos, 1:])] += 1
            o_pos += 1
        for ax in range(d - 1):
            c_new = np.cumsum(c_new, axis=ax)
            o_new = np.cumsum(o_new, axis=ax)
        c_layer += c_new
        o_layer += o_new
        vol = qa * rest_vol
        best = max(best, float((vol - o_layer / n).max()), float((c_layer / n - vol).max()))
    return best


def linf_star_exact(ps) -> DiscrepancyValue:
    """Exact L-infinity star discrepancy for d in {2, 3} by critical-box enumeration."""
    x = _coords(ps)
    n, d = x.shape
    if d not in (2, 3):
        raise ValueError(f"exact enumeration supports d in {{2, 3}}, got d={d}"
                         " (use linf_star_1d for d=1)")
    if n == 0:
        raise ValueError("discrepancy of an empty set is undefined")
    value = _corner_extremes(x, critical_grid(x).axes)
    return DiscrepancyValue(value, Kind.LINF_EXACT, n, d)


def linf_star(ps) -> DiscrepancyValue:
    """Exact L-infinity star discrepancy, dispatching on dimension."""
    x = _coords(ps)
    return linf_star_1d(x) if x.shape[1] == 1 else linf_star_exact(x)


def linf_star_sampled(ps, m: int) -> DiscrepancyValue:
    """Lower bound from the lattice ``{0, 1/m, ..., 1}^d``.

    Every evaluated term is a limit of local discrepancies of half-open boxes,
    so the result never exceeds the exact value; it is within ``d/m`` of it.
    """
    if m < 1:
        raise ValueError("lattice resolution must be >= 1")
    x = _coords(ps)
    n, d = x.shape
    if n == 0:
        raise ValueError("discrepancy of an empty set is undefined")
    g = np.arange(m + 1) / m
    value = _corner_extremes(x, (g,) * d)
    return DiscrepancyValue(value, Kind.LINF_LOWER_BOUND, n, d)


def local_discrepancy(ps, q: np.ndarray) -> np.ndarray:
    """``#{x in [0, q)}/n - vol(q)`` for each row of ``q``."""
    x = _coords(ps)
    q = np.atleast_2d(q)
    inside = np.all(x[None, :, :] < q[:, None, :], axis=2)
    return inside.mean(axis=1) - np.prod(q, axis=1)


def l2_star_warnock(ps, chunk: int = 2048) -> DiscrepancyValue:
    """Squared L2 star discrepancy by Warnock's formula, O(n^2 d).

    Both sums are accumulated with ``math.fsum`` (exactly rounded).
    """
    x = _coords(ps)
    n, d = x.shape
    if n == 0:
        raise ValueError("discrepancy of an empty set is undefined")
    single = math.fsum(np.prod(1.0 - x * x, axis=1))
    pair_parts = []
    for start in range(0, n, chunk):
        block = x[start:start + chunk]
        prod = np.prod(1.0 - np.maximum(block[:, None, :], x[None, :, :]), axis=2)
        pair_parts.append(math.fsum(prod.ravel()))
    pair = math.fsum(pair_parts)
    value = math.fsum([3.0 ** -d, -(2.0 ** (1 - d)) * single / n, pair / (n * n)])
    return DiscrepancyValue(value, Kind.L2_SQUARED, n, d)
