"""Zero counting along the imaginary axis and growth-exponent fits.

Counts use the square ``[-R, R] x [t - R, t + R]`` in place of the disk
``|s - it| < R``: the argument principle needs a contour with straight
edges, and any bound for disks of radius ``R sqrt 2`` covers the square.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .svg import Canvas
from .zeta import (ContourProximityError, LengthSpectrum, Region, ZetaParams, _Evaluator,
                   count_zeros, find_zeros)

log = logging.getLogger(__name__)

RETRY_GROW = 1e-2


@dataclass(frozen=True)
class CountRow:
    t: float
    R: float
    count: int
    retried: bool = False


@dataclass
class CountTable:
    rows: list[CountRow]
    group: str = ""
    params: Optional[ZetaParams] = None

    def __post_init__(self):
        ts = [r.t for r in self.rows]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("t grid must be strictly increasing")
        if any(r.count < 0 for r in self.rows):
            raise ValueError("counts must be nonnegative")

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])

    @property
    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "R", "count", "retried"])
            for r in self.rows:
                w.writerow([repr(r.t), repr(r.R), r.count, int(r.retried)])

    @classmethod
    def from_csv(cls, path) -> "CountTable":
        with open(path, newline="") as fh:
            rows = [CountRow(float(r["t"]), float(r["R"]), int(r["count"]), bool(int(r.get("retried", 0))))
                    for r in csv.DictReader(fh)]
        return cls(rows)


def square(t: float, R: float) -> Region:
    return Region(-R, R, t - R, t + R)


def _count_row(spec, p, ev, t, R) -> CountRow:
    region = square(t, R)
    try:
        return CountRow(t, R, count_zeros(region, spec, p, _ev=ev))
    except ContourProximityError:
        log.info("contour near a zero at t=%g, R=%g; retrying with region grown by %g", t, R, RETRY_GROW)
        return CountRow(t, R, count_zeros(region.grow(RETRY_GROW), spec, p, _ev=ev), True)


def count_along_axis(spec: LengthSpectrum, p: ZetaParams, R: float, t_values: Sequence[float],
                     threads: int = 1, group: str = "") -> CountTable:
    """Zero counts in the squares of half-width ``R`` centered at ``i t``."""
    if R <= 0:
        raise ValueError("R must be positive")
    t_values = [float(t) for t in t_values]
    ev = _Evaluator(spec, p)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda t: _count_row(spec, p, ev, t, R), t_values))
    else:
        rows = [_count_row(spec, p, ev, t, R) for t in t_values]
    return CountTable(rows, group, p)


def count_zero_list(zeros, R: float, t_values: Sequence[float], multiplicities=None,
                    group: str = "zero list") -> CountTable:
    """Counts from explicit zero positions (strict interior of each square)."""
    z = np.asarray(zeros, dtype=complex).ravel()
    m = np.ones(len(z), dtype=int) if multiplicities is None else np.asarray(multiplicities, dtype=int)
    rows = []
    for t in t_values:
        inside = (np.abs(z.real) < R) & (np.abs(z.imag - t) < R)
        rows.append(CountRow(float(t), float(R), int(m[inside].sum())))
    return CountTable(rows, group)


def planted_zeros(alpha: float, t_max: float, density: float = 4.0, x: float = -0.25) -> np.ndarray:
    """Points on the line ``Re s = x`` with height density ``density (1 + t)^alpha``.

    The j-th point sits where the integrated density reaches ``j + 1/2``, so
    the count in a window of height ``2R`` around ``t`` is
    ``2 R density (1 + t)^alpha`` up to one point.
    """
    a1 = alpha + 1
    total = density * ((1 + t_max) ** a1 - 1) / a1
    j = np.arange(int(math.floor(total))) + 0.5
    heights = (1 + a1 * j / density) ** (1 / a1) - 1
    return x + 1j * heights


def default_t_grid(spec: LengthSpectrum, p: ZetaParams, R: float, n: int = 10, t_min: float = 4.0,
                   t_cap: float = 100.0, tol: float = 1e-3) -> list[float]:
    """Geometric grid from ``t_min`` up to the largest probed height where zeros are stable.

    Stability compares zero locations against a coarser truncation (one
    less word length in cycle mode, one less k in product mode).
    """
    if p.word_length_L is not None and p.word_length_L > 1:
        coarse_spec, coarse_p = spec.restrict(p.word_length_L - 1), ZetaParams(p.k_max, p.word_length_L - 1)
    else:
        coarse_spec, coarse_p = spec, ZetaParams(max(p.k_max - 1, 0), p.word_length_L)
    t_top = t_min
    for t in np.geomspace(t_min, t_cap, 6):
        try:
            a = find_zeros(square(t, R), spec, p).zeros
            b = find_zeros(square(t, R), coarse_spec, coarse_p).zeros
        except Exception:
            break
        if len(a) != len(b):
            break
        if a and max(min(abs(za.s - zb.s) for zb in b) for za in a) > tol:
            break
        t_top = float(t)
    if t_top <= t_min:
        return [t_min]
    return [float(v) for v in np.geomspace(t_min, t_top, n)]


@dataclass
class ExponentFit:
    exponent: float
    log_C: float
    residual: float
    n_used: int
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def fit_exponent(table: CountTable) -> ExponentFit:
    """Least-squares slope of ``log max(count, 1)`` against ``log(1 + t)``."""
    t, c = table.t, table.counts
    flags = []
    if (c == 0).any():
        flags.append(f"{int((c == 0).sum())} zero-count rows")
    pos = c > 0
    if len(np.unique(t[pos])) < 2:
        return ExponentFit(0.0, 0.0, 0.0, len(t), flags + ["insufficient data"])
    x = np.log1p(t)
    y = np.log(np.maximum(c, 1).astype(float))
    if np.all(y == y[0]):
        return ExponentFit(0.0, float(y[0]), 0.0, len(t), flags + ["bounded counts"])
    if pos.sum() < 5:
        flags.append("fewer than 5 positive rows")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return ExponentFit(float(slope), float(intercept), rms, len(t), flags)


@dataclass
class BoundReport:
    nu: float
    C: float
    C_half_range: float
    ratio: float
    stable: bool
    budget: Optional[float]
    passed: bool
    note: str = "counts use squares [-R,R]x[t-R,t+R] in place of disks |s-it|<R"

    def to_json(self) -> dict:
        return asdict(self)


def check_bound(table: CountTable, nu: float, budget: Optional[float] = None,
                stability: float = 0.05) -> BoundReport:
    """Smallest C with count <= C (1 + t)^nu on every row.

    ``C_half_range`` is the same constant over the rows with ``t`` at most
    half the largest ``t``; the bound is called stable when doubling the
    range raises C by less than ``stability``. It passes when stable and,
    if a budget is given, ``C <= budget``.
    """
    t, c = table.t, table.counts.astype(float)
    if len(t) == 0:
        return BoundReport(nu, 0.0, 0.0, 1.0, True, budget, True)
    q = c / (1 + t) ** nu
    C = float(q.max())
    half = t <= t.max() / 2
    C_half = float(q[half].max()) if half.any() else C
    if C_half > 0:
        ratio = C / C_half
    else:
        ratio = 1.0 if C == 0 else math.inf
    stable = ratio < 1 + stability
    passed = stable and (budget is None or C <= budget)
    return BoundReport(nu, C, C_half, float(ratio), bool(stable), budget, bool(passed))


def plot_counts(table: CountTable, fit: Optional[ExponentFit], report: Optional[BoundReport], path) -> None:
    """Log-log plot of the counts with the fitted line and the bound envelope."""
    t, c = table.t, np.maximum(table.counts, 1)
    x = np.log10(1 + t)
    y = np.log10(c)
    env = None
    if report is not None and report.C > 0:
        env = np.log10(report.C) + report.nu * x
    ys = [y] + ([env] if env is not None else [])
    lo, hi = min(v.min() for v in ys), max(v.max() for v in ys)
    pad = 0.1 * max(hi - lo, 1.0)
    xpad = 0.05 * max(x.max() - x.min(), 1.0)
    cv = Canvas(x.min() - xpad, x.max() + xpad, lo - pad, hi + pad, margin=60)
    cv.frame()
    for xi, yi in zip(x, y):
        cv.circle(xi, yi, 5, fill="black")
    if fit is not None:
        cv.polyline(x, (fit.log_C + fit.exponent * np.log(1 + t)) / math.log(10), stroke="blue")
    if env is not None:
        cv.polyline(x, env, stroke="red", dash="8,6")
    cv.text(x.min(), hi + pad * 0.5, "log10 count vs log10(1+t)", 22)
    cv.save(path, "zero counts")
