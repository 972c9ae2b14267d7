"""Shared point-set types, exact candidate rationals and the point-file format."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CandidateRational",
    "PointSet",
    "Validation",
    "Violation",
    "candidate_value",
    "format_float",
    "read_points",
    "validate_point_set",
    "write_points",
]


def format_float(x: float) -> str:
    """Decimal literal with 17 significant digits (round-trips a double)."""
    return f"{x:.17g}"


@dataclass(frozen=True)
class Violation:
    index: int | None
    coordinate: int | None
    message: str


@dataclass(frozen=True)
class Validation:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_point_set(points: "PointSet | Iterable[Sequence[float]]") -> Validation:
    """Check every coordinate lies in [0, 1) and all points share one dimension.

    Violations are returned as data, never raised.  Accepts a :class:`PointSet`
    or any iterable of coordinate sequences (which may be ragged).
    """
    if isinstance(points, PointSet):
        points = points.coords
    if isinstance(points, np.ndarray) and points.ndim == 2:
        inside = (points >= 0.0) & (points < 1.0)
        if points.shape[1] >= 1 and inside.all():
            return Validation()
        rows: list[Sequence[float]] = list(points)
    else:
        rows = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]

    found: list[Violation] = []
    dims = {len(r) for r in rows}
    if len(dims) > 1:
        found.append(Violation(None, None, f"mixed dimensions {sorted(dims)}"))
    if 0 in dims:
        found.append(Violation(None, None, "points must have dimension >= 1"))
    for i, row in enumerate(rows):
        for k, c in enumerate(row):
            if not (0.0 <= c < 1.0):
                found.append(Violation(i, k, f"coordinate {c!r} outside [0, 1)"))
    return Validation(tuple(found))


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered, immutable collection of points in ``[0, 1)^d``.

    Row order is generation order, so ``ps[:k]`` is the length-k prefix of a
    sequence.  ``coords`` is a read-only ``(n, d)`` float64 array.
    """

    coords: np.ndarray
    d: int = field(default=0)

    def __init__(self, coords, d: int | None = None):
        arr = np.array(coords, dtype=np.float64)
        if arr.ndim == 1:
            if d not in (None, 1) and arr.size:
                raise ValueError("flat coordinate list is only valid for d=1")
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"expected an (n, d) array, got shape {arr.shape}")
        if d is None:
            d = arr.shape[1]
        if arr.shape[0] == 0:
            arr = arr.reshape(0, d)
        if arr.shape[1] != d or d < 1:
            raise ValueError(f"dimension mismatch: shape {arr.shape}, d={d}")
        check = validate_point_set(arr)
        if not check.ok:
            raise ValueError("; ".join(v.message for v in check.violations[:5]))
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)
        object.__setattr__(self, "d", d)

    @classmethod
    def empty(cls, d: int) -> PointSet:
        return cls(np.zeros((0, d)), d)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, key):
        if isinstance(key, slice):
            return PointSet(self.coords[key], self.d)
        return self.coords[key]

    def __iter__(self):
        return iter(self.coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.coords, other.coords)

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.d})"

    def concat(self, other: PointSet) -> PointSet:
        if other.d != self.d:
            raise ValueError(f"cannot join d={self.d} with d={other.d}")
        return PointSet(np.vstack([self.coords, other.coords]), self.d)


@dataclass(frozen=True, order=True)
class CandidateRational:
    """An element ``(2i+1) / (2(n+1))`` of the greedy candidate set, kept exact."""

    numerator: int
    denominator: int

    def __post_init__(self):
        num, den = self.numerator, self.denominator
        if den < 2 or den % 2:
            raise ValueError(f"denominator must be 2(n+1) with n >= 0, got {den}")
        if num < 0 or num % 2 == 0:
            raise ValueError(f"numerator must be odd and non-negative, got {num}")
        if num >= den:
            raise ValueError(f"{num}/{den} is not inside (0, 1)")

    @classmethod
    def from_cell(cls, i: int, n: int) -> CandidateRational:
        return cls(2 * i + 1, 2 * (n + 1))

    @property
    def index(self) -> int:
        return (self.numerator - 1) // 2

    @property
    def n(self) -> int:
        """Number of points present when this candidate was offered."""
        return self.denominator // 2 - 1

    def as_fraction(self):
        from fractions import Fraction

        return Fraction(self.numerator, self.denominator)


def candidate_value(c: CandidateRational) -> float:
    """The only place a candidate rational becomes a float.

    Python's int/int true division is correctly rounded, so equal rationals
    always map to the same double.
    """
    if not isinstance(c, CandidateRational):
        raise TypeError(f"expected CandidateRational, got {type(c).__name__}")
    return c.numerator / c.denominator


def read_points(source: str | os.PathLike | io.TextIOBase, d: int | None = None) -> PointSet:
    """Parse the whitespace-separated point format (``#`` lines are comments)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not rows:
        if d is None:
            raise ValueError("empty point file: dimension unknown")
        return PointSet.empty(d)
    check = validate_point_set(rows)
    if not check.ok:
        raise ValueError("; ".join(v.message for v in check.violations[:5]))
    ps = PointSet(rows)
    if d is not None and ps.d != d:
        raise ValueError(f"expected d={d}, file has d={ps.d}")
    return ps


def write_points(ps: PointSet, dest: str | os.PathLike | io.TextIOBase,
                 comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines += [" ".join(format_float(c) for c in row) for row in ps.coords]
    body = "\n".join(lines) + ("\n" if lines else "")
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    else:
        dest.write(body)
