"""The d-dimensional greedy L2 functional, its cell-wise gradient, and minimisers.

Adding y to n points changes ``(n+1)^2`` times the squared Warnock L2 star
discrepancy by (up to a y-independent constant)

    F_d(y) = -2^(1-d) (n+1) prod_k (1 - y_k^2) + prod_k (1 - y_k)
             + 2 sum_i prod_k (1 - max(x_ik, y_k)).

The leading term carries a minus sign; with it, d = 1 reduces to
``(n+1) y^2 - y - 2 sum max(x, y)`` plus the constant n.

Between consecutive coordinate values every ``max`` resolves to one argument,
so F_d is a polynomial on each such cell; descent runs cell by cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .core import PointSet

__all__ = [
    "Cell",
    "FunctionalContext",
    "OptimResult",
    "OptimizerConfig",
    "cell_of",
    "cell_value",
    "functional_batch",
    "functional_nd",
    "generate_nd",
    "gradient_nd",
    "minimize",
    "minimize_cells_exhaustive",
    "minimize_graddesc",
    "minimize_grid",
    "minimize_multistart",
    "minimize_random",
    "tie_tolerance",
]

TIE_ULPS = 4
ONE_MINUS = float(np.nextafter(1.0, 0.0))
_CHUNK_ELEMS = 1 << 22

Method = Literal["random", "grid", "graddesc", "multistart"]


@dataclass(frozen=True, eq=False)
class FunctionalContext:
    """The current points plus per-axis sorted coordinates used for cells."""

    points: np.ndarray
    d: int
    axes: tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def from_points(cls, ps, d: int | None = None) -> FunctionalContext:
        if isinstance(ps, PointSet):
            x, d = ps.coords, ps.d
        else:
            x = np.asarray(ps, dtype=np.float64)
            if x.ndim == 1:
                x = x.reshape(-1, d or 1)
            if x.size == 0 and d is not None:
                x = x.reshape(0, d)
            d = x.shape[1]
        x = np.array(x, dtype=np.float64)
        x.setflags(write=False)
        axes = tuple(np.union1d(np.union1d(x[:, k], [0.0]), [1.0]) for k in range(d))
        return cls(x, d, axes)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def with_point(self, y) -> FunctionalContext:
        return FunctionalContext.from_points(np.vstack([self.points, np.reshape(y, (1, self.d))]))


@dataclass(frozen=True)
class Cell:
    """Half-open box ``[lo_k, hi_k)`` between consecutive values of {0} U coords U {1}."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def contains_strictly(self, y) -> bool:
        return all(lo < v < hi for v, lo, hi in zip(y, self.lo, self.hi))


@dataclass(frozen=True)
class OptimizerConfig:
    """Heuristic settings; every field maps onto one CLI flag.

    ``graddesc`` descends from the ``starts`` best points of the
    ``grid_resolution`` lattice, ``multistart`` from the ``starts`` best of
    ``budget`` uniform draws.
    """

    method: Method = "random"
    budget: int = 10_000
    grid_resolution: int = 32
    seed: int = 0
    starts: int = 8
    initial_step: float = 0.1
    shrink: float = 0.5
    max_iters: int = 200
    tol: float = 1e-10

    def __post_init__(self):
        if self.method not in ("random", "grid", "graddesc", "multistart"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.grid_resolution < 1:
            raise ValueError("grid_resolution must be >= 1")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")

    def echo(self) -> list[str]:
        return [f"{k}={getattr(self, k)}" for k in self.__dataclass_fields__]


@dataclass(frozen=True)
class OptimResult:
    point: np.ndarray
    value: float
    converged: bool = True
    evaluations: int = 0

    def __iter__(self):
        return iter((self.point, self.value))


def _as_ctx(ctx) -> FunctionalContext:
    return ctx if isinstance(ctx, FunctionalContext) else FunctionalContext.from_points(ctx)


def _check_domain(y: np.ndarray, d: int) -> None:
    if y.shape[-1] != d:
        raise ValueError(f"y has dimension {y.shape[-1]}, context has d={d}")
    if not ((y >= 0.0).all() and (y < 1.0).all()):
        raise ValueError("y must lie in [0, 1)^d")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def functional_batch(Y: np.ndarray, ctx) -> np.ndarray:
    """F_d at every row of ``Y`` (no domain checks)."""
    ctx = _as_ctx(ctx)
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    d, n, x = ctx.d, ctx.n, ctx.points
    out = -(2.0 ** (1 - d)) * (n + 1) * np.prod(1.0 - Y * Y, axis=1) + np.prod(1.0 - Y, axis=1)
    if n == 0:
        return out
    rows = max(1, _CHUNK_ELEMS // (n * d))
    for s in range(0, Y.shape[0], rows):
        blk = Y[s:s + rows]
        terms = np.prod(1.0 - np.maximum(x[None, :, :], blk[:, None, :]), axis=2)
        out[s:s + rows] += 2.0 * terms.sum(axis=1)
    return out


def functional_nd(y, ctx) -> float:
    ctx = _as_ctx(ctx)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    _check_domain(y, ctx.d)
    return float(functional_batch(y[None, :], ctx)[0])


def cell_of(y, ctx) -> Cell:
    """The cell whose closure holds ``y``; a coordinate on a boundary opens the upper cell."""
    ctx = _as_ctx(ctx)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    lo, hi = [], []
    for k, ax in enumerate(ctx.axes):
        j = int(np.searchsorted(ax, y[k], side="right")) - 1
        j = min(max(j, 0), ax.size - 2)
        lo.append(float(ax[j]))
        hi.append(float(ax[j + 1]))
    return Cell(tuple(lo), tuple(hi))


def _cell_factors(y: np.ndarray, cell: Cell, ctx: FunctionalContext) -> np.ndarray:
    # (n, d) factors 1 - max(x_ik, y_k) with the max frozen by the cell
    above = ctx.points >= np.asarray(cell.hi)[None, :]
    return np.where(above, 1.0 - ctx.points, 1.0 - y[None, :]), above


def cell_value(y, cell: Cell, ctx) -> float:
    """The cell polynomial of F_d, valid on the closed cell."""
    ctx = _as_ctx(ctx)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    d, n = ctx.d, ctx.n
    f, _ = _cell_factors(y, cell, ctx)
    lead = -(2.0 ** (1 - d)) * (n + 1) * np.prod(1.0 - y * y) + np.prod(1.0 - y)
    return float(lead + 2.0 * np.prod(f, axis=1).sum())


def _cell_gradient(y: np.ndarray, cell: Cell, ctx: FunctionalContext) -> np.ndarray:
    d, n = ctx.d, ctx.n
    f, above = _cell_factors(y, cell, ctx)
    sq = 1.0 - y * y
    lin = 1.0 - y
    g = np.empty(d)
    for m in range(d):
        others = [k for k in range(d) if k != m]
        g_m = 2.0 ** (2 - d) * (n + 1) * y[m] * np.prod(sq[others]) - np.prod(lin[others])
        if n:
            below = ~above[:, m]
            g_m -= 2.0 * np.prod(f[below][:, others], axis=1).sum()
        g[m] = g_m
    return g


def gradient_nd(y, cell: Cell, ctx) -> np.ndarray:
    """Exact gradient of the cell polynomial; ``y`` must be strictly inside ``cell``."""
    ctx = _as_ctx(ctx)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    _check_domain(y, ctx.d)
    if not cell.contains_strictly(y):
        raise ValueError("gradient is undefined on cell boundaries; y must be interior")
    return _cell_gradient(y, cell, ctx)


# ---------------------------------------------------------------------------
# minimisers
# ---------------------------------------------------------------------------


def tie_tolerance(n: int) -> float:
    """Values closer than this are tied.

    F_d sums about n terms of size <= 1 next to a leading term of size n+1, so
    its rounding error scales with n, not with |F_d|; ulps are taken of 2(n+1).
    """
    return TIE_ULPS * float(np.spacing(2.0 * (n + 1)))


def _pick(values: np.ndarray, n: int) -> int:
    """First index whose value is tied with the minimum."""
    best = values.min()
    return int(np.flatnonzero(values - best <= tie_tolerance(n))[0])


def _lattice(m: int, d: int) -> np.ndarray:
    g = (2.0 * np.arange(m) + 1.0) / (2.0 * m)
    mesh = np.meshgrid(*([g] * d), indexing="ij")
    return np.stack([a.ravel() for a in mesh], axis=1)


def minimize_random(ctx, cfg: OptimizerConfig, rng: np.random.Generator | None = None) -> OptimResult:
    """Best of ``cfg.budget`` uniform draws; draws for a smaller budget are a prefix."""
    ctx = _as_ctx(ctx)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    Y = rng.random((cfg.budget, ctx.d))
    f = functional_batch(Y, ctx)
    i = int(np.argmin(f))
    return OptimResult(Y[i].copy(), float(f[i]), True, cfg.budget)


def minimize_grid(ctx, cfg: OptimizerConfig) -> OptimResult:
    """Exhaustive search over the midpoint lattice ``(2i+1)/(2m)``; ties go lexicographically first."""
    ctx = _as_ctx(ctx)
    m, d = cfg.grid_resolution, ctx.d
    if m < 2:
        raise ValueError("grid_resolution must be >= 2")
    if m ** d > cfg.budget:
        raise ValueError(f"lattice of {m}^{d} points exceeds budget {cfg.budget}")
    Y = _lattice(m, d)
    f = functional_batch(Y, ctx)
    i = _pick(f, ctx.n)
    return OptimResult(Y[i].copy(), float(f[i]), True, Y.shape[0])


def _descend(y0: np.ndarray, ctx: FunctionalContext, cfg: OptimizerConfig) -> OptimResult:
    """Projected descent with backtracking inside one cell, hopping across
    a face when the gradient pushes outward (at most 4d hops)."""
    d = ctx.d
    y = np.minimum(np.asarray(y0, dtype=np.float64).copy(), ONE_MINUS)
    cell = cell_of(y, ctx)
    lo = np.array(cell.lo)
    hi = np.minimum(np.array(cell.hi), ONE_MINUS)
    fy = cell_value(y, cell, ctx)
    evals = 1
    step = cfg.initial_step
    hops = 0
    converged = False
    while True:
        for _ in range(cfg.max_iters):
            g = _cell_gradient(y, cell, ctx)
            pg = g.copy()
            pg[(y <= lo) & (g > 0)] = 0.0
            pg[(y >= hi) & (g < 0)] = 0.0
            if np.linalg.norm(pg) < cfg.tol:
                converged = True
                break
            t = step
            moved = False
            while t > 1e-16:
                y_new = np.clip(y - t * g, lo, hi)
                f_new = cell_value(y_new, cell, ctx)
                evals += 1
                if f_new < fy - 1e-4 * float(g @ (y - y_new)):
                    y, fy, moved = y_new, f_new, True
                    step = min(t / cfg.shrink, 1.0)
                    break
                t *= cfg.shrink
            if not moved:
                converged = True
                break
        else:
            converged = False

        g = _cell_gradient(y, cell, ctx)
        new_lo, new_hi = list(cell.lo), list(cell.hi)
        hopped = False
        for k, ax in enumerate(ctx.axes):
            j = int(np.searchsorted(ax, cell.lo[k]))
            if y[k] <= lo[k] and g[k] > 0 and j > 0:
                new_lo[k], new_hi[k] = float(ax[j - 1]), float(ax[j])
                hopped = True
            elif y[k] >= hi[k] and g[k] < 0 and j + 2 < ax.size:
                new_lo[k], new_hi[k] = float(ax[j + 1]), float(ax[j + 2])
                hopped = True
        if not hopped:
            break
        if hops >= 4 * d:
            converged = False
            break
        hops += 1
        cell = Cell(tuple(new_lo), tuple(new_hi))
        lo = np.array(cell.lo)
        hi = np.minimum(np.array(cell.hi), ONE_MINUS)
        fy = cell_value(y, cell, ctx)
        converged = False
    value = functional_nd(y, ctx)
    return OptimResult(y, value, converged, evals)


def _best_of(results: list[OptimResult], n: int) -> OptimResult:
    best = min(r.value for r in results)
    tied = [r for r in results if r.value - best <= tie_tolerance(n)]
    winner = min(tied, key=lambda r: tuple(r.point))
    return replace(winner, evaluations=sum(r.evaluations for r in results))


def minimize_graddesc(ctx, cfg: OptimizerConfig, starts=None) -> OptimResult:
    """Cell-restricted descent from explicit ``starts`` or the best lattice points."""
    ctx = _as_ctx(ctx)
    extra = 0
    if starts is None:
        m, d = cfg.grid_resolution, ctx.d
        if m ** d > cfg.budget:
            raise ValueError(f"lattice of {m}^{d} points exceeds budget {cfg.budget}")
        Y = _lattice(m, d)
        f = functional_batch(Y, ctx)
        order = np.lexsort((*(Y[:, k] for k in reversed(range(d))), f))
        starts = Y[order[: cfg.starts]]
        extra = Y.shape[0]
    starts = np.atleast_2d(np.asarray(starts, dtype=np.float64))
    _check_domain(starts, ctx.d)
    results = [_descend(s, ctx, cfg) for s in starts]
    best = _best_of(results, ctx.n)
    return replace(best, evaluations=best.evaluations + extra)


def minimize_multistart(ctx, cfg: OptimizerConfig, rng: np.random.Generator | None = None) -> OptimResult:
    """Descent from the ``cfg.starts`` best of ``cfg.budget`` uniform draws."""
    ctx = _as_ctx(ctx)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    Y = rng.random((cfg.budget, ctx.d))
    f = functional_batch(Y, ctx)
    order = np.argsort(f, kind="stable")[: cfg.starts]
    results = [_descend(Y[i], ctx, cfg) for i in order]
    best = _best_of(results, ctx.n)
    return replace(best, evaluations=best.evaluations + cfg.budget)


def minimize(ctx, cfg: OptimizerConfig, rng: np.random.Generator | None = None) -> OptimResult:
    if cfg.method == "random":
        return minimize_random(ctx, cfg, rng)
    if cfg.method == "grid":
        return minimize_grid(ctx, cfg)
    if cfg.method == "graddesc":
        return minimize_graddesc(ctx, cfg)
    return minimize_multistart(ctx, cfg, rng)


def minimize_cells_exhaustive(ctx, cfg: OptimizerConfig | None = None) -> OptimResult:
    """Test oracle: descend inside every one of the (n+1)^d cells (small n only)."""
    ctx = _as_ctx(ctx)
    if ctx.n > 12 or ctx.d > 3:
        raise ValueError("exhaustive cell search is limited to n <= 12, d <= 3")
    cfg = cfg or OptimizerConfig(method="graddesc", max_iters=2000, tol=1e-12)
    mids = [0.5 * (ax[:-1] + ax[1:]) for ax in ctx.axes]
    mesh = np.meshgrid(*mids, indexing="ij")
    centres = np.stack([a.ravel() for a in mesh], axis=1)
    results = [_descend(c, ctx, cfg) for c in centres]
    return _best_of(results, ctx.n)


def generate_nd(init, count: int, cfg: OptimizerConfig, d: int | None = None) -> PointSet:
    """Append ``count`` greedy points using the configured heuristic.

    All randomness comes from one generator seeded with ``cfg.seed``.
    """
    if isinstance(init, PointSet):
        x = init.coords
        d = init.d
    else:
        if d is None:
            raise ValueError("d is required when init is not a PointSet")
        x = np.asarray(init, dtype=np.float64).reshape(-1, d)
    if d not in (1, 2, 3):
        raise ValueError(f"generation supports d in {{1, 2, 3}}, got d={d}")
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = np.random.default_rng(cfg.seed)
    pts = [row for row in x]
    for _ in range(count):
        ctx = FunctionalContext.from_points(np.array(pts).reshape(-1, d), d)
        res = minimize(ctx, cfg, rng)
        pts.append(np.asarray(res.point, dtype=np.float64))
    return PointSet(np.array(pts).reshape(-1, d), d)

