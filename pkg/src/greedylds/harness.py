"""Experiment harness: discrepancy traces, pairwise comparisons, robustness runs.

Every trace is a list of (n, raw, scaled) with ``scaled = n * raw / ln(n)^p``
evaluated at n = stride, 2 stride, ..., N on one generated prefix.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import PointSet, format_float
from .discrepancy import l2_star_warnock, linf_star_1d, linf_star_exact, linf_star_sampled
from .functional import OptimizerConfig, generate_nd
from .greedy1d import generate_1d
from .sequences import (
    GOLDEN_RATIO,
    KroneckerSpec,
    SobolSpec,
    VdcSpec,
    kronecker,
    niederreiter_set,
    sobol,
    van_der_corput,
)

__all__ = [
    "BAD_INIT",
    "EXACT_LIMITS",
    "SINGLE_STARTS",
    "ComparisonReport",
    "DiscrepancyTrace",
    "Envelope",
    "MeasureSpec",
    "SequenceSpec",
    "bad_init_experiment",
    "compare",
    "nd_experiment",
    "robustness_random_starts",
    "robustness_single_starts",
    "trace",
]

KINDS = ("kritzinger", "kronecker", "vdc", "sobol", "niederreiter")
SINGLE_STARTS = tuple(j / 10 for j in range(10)) + (0.9999,)
BAD_INIT = tuple(k / 10_000 for k in range(100))
# largest N for which the exact L-infinity enumeration is offered per dimension
EXACT_LIMITS = {1: None, 2: 4000, 3: 400}


@dataclass(frozen=True)
class SequenceSpec:
    """One comparison sequence.  Kronecker starts at k = 0 (the origin) here."""

    kind: str = "kritzinger"
    d: int = 1
    init: tuple[tuple[float, ...], ...] = ((0.5,),)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    alpha: float = GOLDEN_RATIO
    base: int = 2
    permutations: tuple[tuple[int, ...], ...] = ()
    skip_zero: bool = False
    start_index: int = 0
    label: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if self.kind in ("kronecker", "vdc", "niederreiter") and self.d != 1:
            raise ValueError(f"{self.kind} is one-dimensional")
        init = tuple(tuple(float(c) for c in p) for p in self.init)
        if self.kind == "kritzinger" and any(len(p) != self.d for p in init):
            raise ValueError(f"initial points must have dimension {self.d}")
        object.__setattr__(self, "init", init)

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "kritzinger":
            if len(self.init) == 1:
                return "kritzinger(" + ",".join(f"{c:g}" for c in self.init[0]) + ")"
            return f"kritzinger({len(self.init)} initial points)"
        return self.kind

    def echo(self) -> list[str]:
        lines = [f"sequence={self.kind}", f"d={self.d}"]
        if self.kind == "kritzinger":
            if len(self.init) <= 8:
                lines.append("init=" + ";".join(" ".join(format_float(c) for c in p) for p in self.init))
            else:
                flat = np.array(self.init).ravel()
                lines.append(f"init={len(self.init)} points in [{format_float(flat.min())}, "
                             f"{format_float(flat.max())}]")
            if self.d > 1:
                lines += self.optimizer.echo()
        elif self.kind == "kronecker":
            lines.append(f"alpha={format_float(self.alpha)}")
            lines.append(f"start_index={self.start_index}")
        elif self.kind == "vdc":
            lines.append(f"base={self.base}")
            if self.permutations:
                lines.append(f"permutations={len(self.permutations)}")
        elif self.kind == "sobol":
            lines.append(f"skip_zero={self.skip_zero}")
        return lines

    def prefix(self, N: int) -> PointSet:
        """The first N elements (initial points included for kritzinger)."""
        if N < 1:
            raise ValueError("N must be >= 1")
        if self.kind == "kritzinger":
            if self.d == 1:
                return _kritzinger_1d(tuple(p[0] for p in self.init), N)
            init = PointSet(np.array(self.init).reshape(-1, self.d), self.d)
            if N <= init.n:
                return init[:N]
            return generate_nd(init, N - init.n, self.optimizer)
        if self.kind == "kronecker":
            return kronecker(KroneckerSpec(self.alpha, self.start_index), N)
        if self.kind == "vdc":
            return van_der_corput(VdcSpec(self.base, self.permutations), N)
        if self.kind == "sobol":
            return sobol(SobolSpec(self.d, self.skip_zero), N)
        raise ValueError("niederreiter sets are not nested; use points_at")

    def points_at(self, N: int) -> Callable[[int], PointSet]:
        """A map n -> the n-point set measured at checkpoint n (n <= N)."""
        if self.kind == "niederreiter":
            return niederreiter_set
        full = self.prefix(N)
        return lambda n: full[:n]


@lru_cache(maxsize=16)
def _kritzinger_1d(init: tuple[float, ...], N: int) -> PointSet:
    base = PointSet(np.array(init, dtype=np.float64), 1)
    if N <= base.n:
        return base[:N]
    return generate_1d(base, N - base.n)


@dataclass(frozen=True)
class MeasureSpec:
    """``linf`` (exact, or lattice lower bound with ``sampled=m``) or ``l2`` (squared)."""

    kind: str = "linf"
    sampled: int | None = None

    def __post_init__(self):
        if self.kind not in ("linf", "l2"):
            raise ValueError(f"unknown measure {self.kind!r}; choose linf or l2")
        if self.sampled is not None and self.sampled < 1:
            raise ValueError("sampled resolution must be >= 1")

    def echo(self) -> list[str]:
        out = [f"measure={self.kind}"]
        if self.kind == "linf":
            out.append(f"linf_mode={'sampled' if self.sampled else 'exact'}")
            if self.sampled:
                out.append(f"lattice={self.sampled}")
        return out

    def check(self, d: int, N: int) -> None:
        if self.kind != "linf" or self.sampled or d == 1:
            return
        limit = EXACT_LIMITS[d]
        if N > limit:
            raise ValueError(f"exact L-infinity is limited to N <= {limit} in d={d};"
                             " pass a lattice resolution (--sampled m) for larger N")

    def __call__(self, ps: PointSet) -> float:
        if self.kind == "l2":
            return l2_star_warnock(ps).value
        if self.sampled:
            return linf_star_sampled(ps, self.sampled).value
        if ps.d == 1:
            return linf_star_1d(ps).value
        return linf_star_exact(ps).value


def scale(n: np.ndarray, raw: np.ndarray, p: float) -> np.ndarray:
    n = np.asarray(n, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = n * raw / np.log(n) ** p
    out[n <= 1] = np.nan
    return out


def _checkpoints(N: int, stride: int) -> np.ndarray:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if N < stride:
        raise ValueError("N must be >= stride")
    return np.arange(stride, N + 1, stride, dtype=np.int64)


@dataclass(frozen=True)
class DiscrepancyTrace:
    n: np.ndarray
    raw: np.ndarray
    scaled: np.ndarray
    p: float
    label: str
    config: tuple[str, ...] = ()

    def __len__(self) -> int:
        return self.n.size

    def records(self) -> list[tuple[int, float, float]]:
        return [(int(a), float(b), float(c)) for a, b, c in zip(self.n, self.raw, self.scaled)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.config:
            buf.write(f"# {line}\n")
        buf.write("n,raw,scaled\n")
        for n, raw, sc in self.records():
            buf.write(f"{n},{format_float(raw)},{format_float(sc)}\n")
        return buf.getvalue()


def trace(spec: SequenceSpec, N: int, stride: int = 1000,
          measure: MeasureSpec | None = None, p: float = 1.0) -> DiscrepancyTrace:
    measure = measure or MeasureSpec()
    ns = _checkpoints(N, stride)
    measure.check(spec.d, N)
    at = spec.points_at(N)
    raw = np.array([measure(at(int(n))) for n in ns])
    config = (*spec.echo(), *measure.echo(), f"N={N}", f"stride={stride}", f"p={format_float(p)}")
    return DiscrepancyTrace(ns, raw, scale(ns, raw, p), p, spec.name, config)


@dataclass(frozen=True)
class ComparisonReport:
    """Per-checkpoint scores of A against B: 1 when A is lower, 0.5 on a tie."""

    n: np.ndarray
    raw_a: np.ndarray
    raw_b: np.ndarray
    label_a: str
    label_b: str

    @property
    def score_a(self) -> np.ndarray:
        return np.where(self.raw_a < self.raw_b, 1.0, np.where(self.raw_a == self.raw_b, 0.5, 0.0))

    @property
    def proportion_a(self) -> np.ndarray:
        """Cumulative share of checkpoints won by A."""
        return np.cumsum(self.score_a) / np.arange(1, self.n.size + 1)

    @property
    def final_proportion(self) -> float:
        return float(self.proportion_a[-1])

    def to_csv(self, config: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for line in config:
            buf.write(f"# {line}\n")
        buf.write(f"# a={self.label_a}\n# b={self.label_b}\n")
        buf.write("n,raw_a,raw_b,score_a,proportion_a\n")
        for row in zip(self.n, self.raw_a, self.raw_b, self.score_a, self.proportion_a):
            buf.write(f"{int(row[0])}," + ",".join(format_float(float(v)) for v in row[1:]) + "\n")
        return buf.getvalue()


def compare(spec_a: SequenceSpec, spec_b: SequenceSpec, N: int, stride: int = 1000,
            measure: MeasureSpec | None = None) -> ComparisonReport:
    ta = trace(spec_a, N, stride, measure)
    tb = trace(spec_b, N, stride, measure)
    return ComparisonReport(ta.n, ta.raw, tb.raw, ta.label, tb.label)


@dataclass(frozen=True)
class Envelope:
    """Pointwise min / mean / max of the scaled values of several traces."""

    traces: tuple[DiscrepancyTrace, ...]

    @property
    def n(self) -> np.ndarray:
        return self.traces[0].n

    def _stack(self) -> np.ndarray:
        return np.stack([t.scaled for t in self.traces])

    @property
    def min(self) -> np.ndarray:
        return self._stack().min(axis=0)

    @property
    def mean(self) -> np.ndarray:
        return self._stack().mean(axis=0)

    @property
    def max(self) -> np.ndarray:
        return self._stack().max(axis=0)

    @property
    def spread(self) -> np.ndarray:
        return self.max - self.min

    def to_csv(self, config: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for line in config:
            buf.write(f"# {line}\n")
        for t in self.traces:
            buf.write(f"# member={t.label}\n")
        buf.write("n,min,mean,max\n")
        for n, lo, mu, hi in zip(self.n, self.min, self.mean, self.max):
            buf.write(f"{int(n)},{format_float(lo)},{format_float(mu)},{format_float(hi)}\n")
        return buf.getvalue()


def robustness_single_starts(N: int, stride: int = 1000, p: float = 1.0,
                             starts=SINGLE_STARTS) -> Envelope:
    traces = tuple(trace(SequenceSpec("kritzinger", 1, ((s,),)), N, stride, p=p) for s in starts)
    return Envelope(traces)


def robustness_random_starts(N: int, stride: int = 1000, sets: int = 6, k: int = 5,
                             seed: int = 0, p: float = 1.0) -> Envelope:
    rng = np.random.default_rng(seed)
    inits = rng.random((sets, k))
    traces = []
    for j, row in enumerate(inits):
        spec = SequenceSpec("kritzinger", 1, tuple((float(v),) for v in row), label=f"random set {j}")
        traces.append(trace(spec, N, stride, p=p))
    return Envelope(tuple(traces))


def bad_init_experiment(N: int = 10_000, stride: int = 1000, p: float = 1.0) -> DiscrepancyTrace:
    """Start from 100 points packed into [0, 0.01) and record raw L-infinity every ``stride``."""
    if N < 10_000:
        raise ValueError("the clustered start needs N >= 10000")
    spec = SequenceSpec("kritzinger", 1, tuple((v,) for v in BAD_INIT), label="kritzinger(bad init)")
    return trace(spec, N, stride, p=p)


def nd_experiment(d: int, cfg: OptimizerConfig, N: int = 500, stride: int = 10,
                  p: float = 1.0, sampled: int | None = None,
                  skip_zero: bool = False) -> tuple[DiscrepancyTrace, DiscrepancyTrace]:
    """Greedy sequence from (0.5, ..., 0.5) against Sobol' on identical checkpoints."""
    if d not in (2, 3):
        raise ValueError(f"d must be 2 or 3, got {d}")
    measure = MeasureSpec("linf", sampled)
    measure.check(d, N)
    greedy = SequenceSpec("kritzinger", d, ((0.5,) * d,), optimizer=cfg)
    ref = SequenceSpec("sobol", d, skip_zero=skip_zero)
    return trace(greedy, N, stride, measure, p), trace(ref, N, stride, measure, p)


def ratio_max(a: DiscrepancyTrace, b: DiscrepancyTrace, n_min: int = 1) -> float:
    keep = a.n >= n_min
    return float(np.max(a.raw[keep] / b.raw[keep]))


def log_scale(n: int, raw: float, p: float) -> float:
    """Scalar form of the scaling, for spot checks."""
    return n * raw / math.log(n) ** p
