"""One-dimensional greedy L2 sequence via the interval-polynomial sweep.

With the current points sorted as x_1 < ... < x_n, the functional

    F(y) = (n+1) y^2 - y - 2 * sum_j max(x_j, y)

restricted to the cell holding exactly i points below y is the quadratic

    F_i(y) = (n+1) y^2 - A_i y - B_i,   A_i = 2i + 1,   B_i = 2 * sum_{j > i} x_j.

Its vertex is (2i+1) / (2(n+1)), so only n+1 candidates exist.  Walking the
cells from i = n (A_n = 2n+1, B_n = 0) down to i = 0 uses

    A_{i-1} = A_i - 2,   B_{i-1} = B_i + 2 x_i,

which gives every vertex value in O(n) per new point.  F is concave at every
breakpoint, so the minimiser is always the vertex of some cell and lies
strictly inside it.

Ties (equal F up to 4 ulps) go to the smallest candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import CandidateRational, PointSet, candidate_value

__all__ = [
    "Greedy1D",
    "QuadCell",
    "SortedSet1D",
    "TIE_ULPS",
    "functional_1d",
    "generate_1d",
    "next_point_bruteforce",
    "next_point_sweep",
    "sweep_cells",
]

TIE_ULPS = 4


class SortedSet1D:
    """Sorted 1-D multiset with suffix sums, owned by a single generator.

    ``suffix_sums[i]`` is the sum of ``values[i:]`` (the points above cell i),
    with ``suffix_sums[n] == 0``; the constant of cell i is ``2 * suffix_sums[i]``.
    """

    def __init__(self, values=(), capacity: int | None = None):
        vals = np.sort(np.asarray(values, dtype=np.float64).ravel())
        if vals.size and not ((vals >= 0.0).all() and (vals < 1.0).all()):
            raise ValueError("values must lie in [0, 1)")
        n = vals.size
        cap = max(capacity or 0, n, 16)
        self._values = np.zeros(cap, dtype=np.float64)
        self._suffix = np.zeros(cap + 1, dtype=np.float64)
        self._values[:n] = vals
        self._suffix[:n] = np.cumsum(vals[::-1])[::-1]
        self._n = n

    def __len__(self) -> int:
        return self._n

    @property
    def n(self) -> int:
        return self._n

    @property
    def values(self) -> np.ndarray:
        return self._values[: self._n]

    @property
    def suffix_sums(self) -> np.ndarray:
        return self._suffix[: self._n + 1]

    def reserve(self, extra: int) -> None:
        need = self._n + extra
        if need <= self._values.size:
            return
        cap = max(need, 2 * self._values.size)
        values = np.zeros(cap, dtype=np.float64)
        suffix = np.zeros(cap + 1, dtype=np.float64)
        values[: self._n] = self.values
        suffix[: self._n + 1] = self.suffix_sums
        self._values, self._suffix = values, suffix

    def insert(self, x: float) -> int:
        """Insert ``x`` and return its position in sorted order."""
        if not 0.0 <= x < 1.0:
            raise ValueError(f"{x!r} outside [0, 1)")
        self.reserve(1)
        pos = int(np.searchsorted(self.values, x, side="left"))
        _insert_sorted(self._values, self._suffix, self._n, pos, x)
        self._n += 1
        return pos

    def copy(self) -> SortedSet1D:
        other = SortedSet1D.__new__(SortedSet1D)
        other._values = self._values.copy()
        other._suffix = self._suffix.copy()
        other._n = self._n
        return other


@dataclass(frozen=True)
class QuadCell:
    """F restricted to one cell: ``(n+1) y^2 - A y - B`` on ``[lo, hi]``."""

    index: int
    n: int
    A: int
    B: float
    lo: float
    hi: float

    @property
    def vertex(self) -> CandidateRational:
        return CandidateRational(self.A, 2 * (self.n + 1))

    @property
    def vertex_value(self) -> float:
        return -(self.A * self.A) / (4.0 * (self.n + 1)) - self.B

    def admissible(self) -> bool:
        v = candidate_value(self.vertex)
        return self.lo < v < self.hi

    def __call__(self, y: float) -> float:
        return (self.n + 1) * y * y - self.A * y - self.B


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _insert_sorted(values, suffix, n, pos, x):
    for j in range(n, pos, -1):
        values[j] = values[j - 1]
    values[pos] = x
    # suffix[j] = sum(values[j:]): entries above pos shift, the rest gain x
    for j in range(n + 1, pos, -1):
        suffix[j] = suffix[j - 1]
    for j in range(pos + 1):
        suffix[j] += x


@numba.njit(cache=True)
def _sweep_values(values, n, fvals, bvals):
    """Fill bvals[i] = B_i and fvals[i] = F_i(vertex), or inf if the vertex
    is not strictly inside cell i."""
    # B by the downward recurrence, compensated (two-sum)
    b_hi = 0.0
    b_lo = 0.0
    bvals[n] = 0.0
    for i in range(n - 1, -1, -1):
        t = 2.0 * values[i]
        s = b_hi + t
        bb = s - b_hi
        b_lo += (b_hi - (s - bb)) + (t - bb)
        b_hi = s
        bvals[i] = b_hi + b_lo
    two_n1 = 2.0 * (n + 1)
    four_n1 = 4.0 * (n + 1)
    for i in range(n + 1):
        lo = values[i - 1] if i > 0 else 0.0
        hi = values[i] if i < n else 1.0
        a = 2.0 * i + 1.0
        # correctly rounded, so equality with a committed point is exact
        v = a / two_n1
        f = -(a * a / four_n1) - bvals[i]
        fvals[i] = f if (lo < v) & (v < hi) else np.inf


@numba.njit(cache=True)
def _leftmost_min(fvals, m, ulps):
    best = np.inf
    for i in range(m):
        if fvals[i] < best:
            best = fvals[i]
    if best == np.inf:
        return -1
    tol = ulps * np.spacing(abs(best))
    for i in range(m):
        if fvals[i] - best <= tol:
            return i
    return -1


@numba.njit(cache=True)
def _run(values, suffix, n, count, cells_out, fvals, bvals, ulps):
    """Append ``count`` greedy points in place; record the winning cell indices."""
    for step in range(count):
        _sweep_values(values, n, fvals, bvals)
        i = _leftmost_min(fvals, n + 1, ulps)
        if i < 0:
            return step
        cells_out[step] = i
        _insert_sorted(values, suffix, n, i, (2.0 * i + 1.0) / (2.0 * (n + 1)))
        n += 1
    return count


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def _as_sorted(ps) -> SortedSet1D:
    if isinstance(ps, SortedSet1D):
        return ps
    if isinstance(ps, PointSet):
        if ps.d != 1:
            raise ValueError(f"expected d=1, got d={ps.d}")
        return SortedSet1D(ps.coords[:, 0])
    return SortedSet1D(ps)


def functional_1d(y: float, ps) -> float:
    """Direct O(n) evaluation of ``(n+1) y^2 - y - 2 sum max(x, y)``."""
    if not 0.0 <= y < 1.0:
        raise ValueError(f"y={y!r} outside [0, 1)")
    x = _as_sorted(ps).values
    n = x.size
    return (n + 1) * y * y - y - 2.0 * float(np.maximum(x, y).sum())


def sweep_cells(ps) -> list[QuadCell]:
    """All n+1 cell polynomials, with B from the recurrence."""
    s = _as_sorted(ps)
    n = s.n
    fvals = np.empty(n + 1)
    bvals = np.empty(n + 1)
    _sweep_values(s.values, n, fvals, bvals)
    x = s.values
    return [
        QuadCell(i, n, 2 * i + 1, float(bvals[i]),
                 float(x[i - 1]) if i > 0 else 0.0,
                 float(x[i]) if i < n else 1.0)
        for i in range(n + 1)
    ]


def next_point_sweep(ps) -> tuple[CandidateRational, float]:
    """Greedy minimiser over the candidate set via the linear-time sweep."""
    s = _as_sorted(ps)
    n = s.n
    fvals = np.empty(n + 1)
    bvals = np.empty(n + 1)
    _sweep_values(s.values, n, fvals, bvals)
    i = _leftmost_min(fvals, n + 1, TIE_ULPS)
    if i < 0:
        raise RuntimeError(f"no admissible cell among {n + 1}; inconsistent point set")
    return CandidateRational.from_cell(i, n), float(fvals[i])


def next_point_bruteforce(ps) -> tuple[CandidateRational, float]:
    """Test oracle: evaluate F directly at every candidate, O(n^2)."""
    s = _as_sorted(ps)
    x = s.values
    n = s.n
    cand = (2.0 * np.arange(n + 1) + 1.0) / (2.0 * (n + 1))
    keep = ~np.isin(cand, x)
    if not keep.any():
        raise RuntimeError("every candidate coincides with an existing point")
    idx = np.flatnonzero(keep)
    y = cand[idx]
    f = (n + 1) * y * y - y - 2.0 * np.maximum(x[None, :], y[:, None]).sum(axis=1)
    best = f.min()
    tol = TIE_ULPS * np.spacing(abs(best))
    j = int(np.flatnonzero(f - best <= tol)[0])
    return CandidateRational.from_cell(int(idx[j]), n), float(f[j])


class Greedy1D:
    """Stateful greedy generator; reconstructible from its point list alone."""

    def __init__(self, init=()):
        init_arr = (init.coords[:, 0] if isinstance(init, PointSet)
                    else np.asarray(init, dtype=np.float64).ravel())
        self._sorted = SortedSet1D(init_arr)
        self._order = [float(v) for v in init_arr]
        self._n_init = len(self._order)
        self.cells: list[int] = []

    @property
    def n(self) -> int:
        return self._sorted.n

    @property
    def sorted(self) -> SortedSet1D:
        return self._sorted

    def candidates(self) -> list[CandidateRational]:
        """The exact rational chosen at each generated step."""
        return [CandidateRational.from_cell(i, self._n_init + k)
                for k, i in enumerate(self.cells)]

    def extend(self, count: int) -> None:
        if count < 0:
            raise ValueError("count must be >= 0")
        if count == 0:
            return
        s = self._sorted
        s.reserve(count)
        n0 = s.n
        out = np.empty(count, dtype=np.int64)
        scratch_f = np.empty(n0 + count + 1)
        scratch_b = np.empty(n0 + count + 1)
        done = _run(s._values, s._suffix, n0, count, out, scratch_f, scratch_b, TIE_ULPS)
        # keep the set consistent with what was committed before a failure
        s._n = n0 + done
        new = out[:done]
        self.cells.extend(int(i) for i in new)
        n_at = n0 + np.arange(done)
        self._order.extend(((2 * new + 1) / (2 * (n_at + 1))).tolist())
        if done < count:
            raise RuntimeError(f"no admissible cell at n={n0 + done}")

    def points(self) -> PointSet:
        return PointSet(np.asarray(self._order, dtype=np.float64), 1)


def generate_1d(init: PointSet | None, count: int) -> PointSet:
    """Append ``count`` greedy points to ``init`` (generation order kept)."""
    if init is not None and isinstance(init, PointSet) and init.d != 1:
        raise ValueError(f"init must be 1-D, got d={init.d}")
    gen = Greedy1D(init if init is not None else ())
    gen.extend(count)
    return gen.points()
