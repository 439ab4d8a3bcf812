"""Selberg zeta function of a hyperbolic surface from its length spectrum.

The zeta function is the product

    Z(s) = prod_gamma prod_{k=0}^{k_max} (1 - exp(-(s + k) l_gamma))

over primitive closed geodesics. Two evaluation modes are available:

* ``word_length_L=None`` evaluates the product as written (every listed
  geodesic, every k).  This is exact for finite spectra such as the single
  geodesic of a hyperbolic cylinder, but for a Schottky spectrum the finite
  product has zeros only on the lines ``Re s = -k``.
* ``word_length_L=L`` expands the product as a power series graded by word
  length (a cycle expansion) and keeps terms of total degree <= L.  This is
  the truncation that converges for Schottky groups; its largest real zero
  approximates the limit-set dimension.

Group spectra list unoriented classes once and carry ``orientations=2``: each
class stands for a geodesic and its reverse, both of which are elements of
the primitive set.
"""

from __future__ import annotations

import cmath
import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, minimize_scalar

from .groups import GeneratorSystem, group_hash, word_matrix
from .moebius import classify, complex_length
from .words import primitive_classes

log = logging.getLogger(__name__)


class ZetaError(RuntimeError):
    """Numerical failure while integrating or searching for zeros."""


class ContourProximityError(ZetaError):
    def __init__(self, msg: str = "contour too close to zero; perturb region", region=None):
        super().__init__(msg)
        self.region = region


class NewtonError(ZetaError):
    def __init__(self, msg: str, cell=None):
        super().__init__(msg)
        self.cell = cell


# --- data types ------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumEntry:
    l: float
    theta: float
    mult: int
    word_length: int


@dataclass(frozen=True)
class LengthSpectrum:
    entries: tuple[SpectrumEntry, ...]
    cutoff_word_length: Optional[int]
    orientations: int = 2

    @property
    def l_max(self) -> float:
        return max(e.l for e in self.entries)

    @property
    def l_min(self) -> float:
        return min(e.l for e in self.entries)

    def restrict(self, L: int) -> "LengthSpectrum":
        """Entries of word length <= L."""
        return LengthSpectrum(tuple(e for e in self.entries if e.word_length <= L), L, self.orientations)

    def to_json(self) -> dict:
        return {
            "cutoff_word_length": self.cutoff_word_length,
            "orientations": self.orientations,
            "entries": [[e.l, e.theta, e.mult, e.word_length] for e in self.entries],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LengthSpectrum":
        entries = tuple(SpectrumEntry(float(l), float(t), int(m), int(w)) for l, t, m, w in doc["entries"])
        return cls(entries, doc["cutoff_word_length"], int(doc.get("orientations", 2)))


@dataclass(frozen=True)
class ZetaParams:
    k_max: int = 3
    word_length_L: Optional[int] = None

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if self.word_length_L is not None and self.word_length_L < 1:
            raise ValueError("word_length_L must be >= 1")

    @classmethod
    def for_region(cls, region: "Region", word_length_L: Optional[int] = None) -> "ZetaParams":
        return cls(math.ceil(abs(min(region.xmin, 0.0))) + 3, word_length_L)


@dataclass(frozen=True)
class Region:
    """Axis-parallel rectangle ``[xmin, xmax] x [ymin, ymax]`` in the s-plane."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("region needs xmin < xmax and ymin < ymax")

    def contains(self, s: complex) -> bool:
        return self.xmin < s.real < self.xmax and self.ymin < s.imag < self.ymax

    @property
    def diameter(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def grow(self, eps: float) -> "Region":
        return Region(self.xmin - eps, self.xmax + eps, self.ymin - eps, self.ymax + eps)

    def as_list(self) -> list[float]:
        return [self.xmin, self.xmax, self.ymin, self.ymax]


@dataclass(frozen=True)
class Zero:
    s: complex
    multiplicity: int


@dataclass
class ZeroList:
    zeros: list[Zero]
    region: Region
    params: ZetaParams
    meta: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(z.multiplicity for z in self.zeros)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "mult"])
            for z in self.zeros:
                w.writerow([repr(z.s.real), repr(z.s.imag), z.multiplicity])

    def to_json(self) -> dict:
        return {
            "region": self.region.as_list(),
            "params": asdict(self.params),
            "zeros": [[z.s.real, z.s.imag, z.multiplicity] for z in self.zeros],
            "meta": self.meta,
        }


# --- spectra ---------------------------------------------------------------


def single_geodesic_spectrum(ell: float) -> LengthSpectrum:
    """One oriented closed geodesic of length ``ell``."""
    if ell <= 0:
        raise ValueError("ell must be positive")
    return LengthSpectrum((SpectrumEntry(float(ell), 0.0, 1, 1),), 1, orientations=1)


def length_spectrum(g: GeneratorSystem, L: int) -> LengthSpectrum:
    """Lengths of all unoriented primitive classes of word length <= L."""
    if not g.schottky_flag:
        raise ValueError("length spectrum requires a Schottky group")
    raw = []
    for cls in primitive_classes(g.k, L):
        m = word_matrix(cls.canonical, g)
        if classify(m) != "loxodromic":
            raise ValueError("non-hyperbolic element in spectrum")
        cl = complex_length(m)
        raw.append((cls.length, cl.l, cl.theta))
    raw.sort(key=lambda t: (t[0], t[1], t[2]))
    merged: list[list] = []
    for wl, l, th in raw:
        last = merged[-1] if merged else None
        if last and last[3] == wl and abs(last[0] - l) < 1e-9 and abs(last[1] - th) < 1e-9:
            last[2] += 1
        else:
            merged.append([l, th, 1, wl])
    entries = sorted((SpectrumEntry(*e) for e in merged), key=lambda e: (e.l, e.word_length))
    return LengthSpectrum(tuple(entries), L, orientations=2)


def cached_length_spectrum(g: GeneratorSystem, L: int, cache_dir=None) -> LengthSpectrum:
    """``length_spectrum`` with an on-disk cache keyed by (group hash, L)."""
    if cache_dir is None:
        return length_spectrum(g, L)
    path = Path(cache_dir) / f"spectrum_{group_hash(g)}_L{L}.json"
    if path.exists():
        return LengthSpectrum.from_json(json.loads(path.read_text()))
    spec = length_spectrum(g, L)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(spec.to_json()))
    return spec


# --- evaluation ------------------------------------------------------------


class _Evaluator:
    """Vectorized Z and Z'/Z for a fixed spectrum and parameter set."""

    def __init__(self, spec: LengthSpectrum, p: ZetaParams):
        self.spec = spec
        self.p = p
        if p.word_length_L is None:
            self._init_product()
        else:
            self._init_cycle(p.word_length_L)

    def _init_product(self):
        ls, ks, ws = [], [], []
        for e in self.spec.entries:
            for k in range(self.p.k_max + 1):
                ls.append(e.l)
                ks.append(k)
                ws.append(self.spec.orientations * e.mult)
        self.ls = np.array(ls)
        self.ks = np.array(ks, dtype=float)
        self.ws = np.array(ws, dtype=float)

    def _init_cycle(self, L: int):
        K = self.p.k_max
        ml, coef, deg = [], [], []
        for e in self.spec.entries:
            wt = self.spec.orientations * e.mult
            m = 1
            while m * e.word_length <= L:
                x = math.exp(-m * e.l)
                geo = (1 - x ** (K + 1)) / (1 - x)
                ml.append(m * e.l)
                coef.append(wt * geo / m)
                deg.append(m * e.word_length)
                m += 1
        self.L = L
        self.ml = np.array(ml)
        self.coef = np.array(coef)
        self.deg = np.array(deg, dtype=int)
        ind = np.zeros((L, len(ml)))
        ind[self.deg - 1, np.arange(len(ml))] = 1.0
        self.ind = ind

    def _cycle_coeffs(self, s: np.ndarray):
        E = np.exp(-np.outer(self.ml, s))
        a = -(self.ind * self.coef) @ E
        da = (self.ind * (self.coef * self.ml)) @ E
        L = self.L
        b = np.zeros((L + 1, s.size), dtype=complex)
        db = np.zeros_like(b)
        b[0] = 1.0
        for n in range(1, L + 1):
            j = np.arange(1, n + 1)
            acc = (j[:, None] * a[j - 1] * b[n - j]).sum(axis=0)
            dacc = (j[:, None] * (da[j - 1] * b[n - j] + a[j - 1] * db[n - j])).sum(axis=0)
            b[n] = acc / n
            db[n] = dacc / n
        return b, db

    def value_and_derivative(self, s) -> tuple[np.ndarray, np.ndarray]:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        if self.p.word_length_L is None:
            x = np.exp(-np.outer(self.ls, s) - (self.ls * self.ks)[:, None])
            logs = self.ws[:, None] * np.log(1 - x)
            Z = np.exp(logs.sum(axis=0))
            return Z, Z * self.log_derivative(s)
        b, db = self._cycle_coeffs(s)
        return b.sum(axis=0), db.sum(axis=0)

    def log_derivative(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        if self.p.word_length_L is None:
            x = np.exp(-np.outer(self.ls, s) - (self.ls * self.ks)[:, None])
            with np.errstate(divide="ignore", invalid="ignore"):
                return ((self.ws * self.ls)[:, None] * x / (1 - x)).sum(axis=0)
        Z, dZ = self.value_and_derivative(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return dZ / Z

    def log_zeta(self, s: complex) -> complex:
        if self.p.word_length_L is None:
            total = 0j
            for l, k, w in zip(self.ls, self.ks, self.ws):
                # nearest zero of this factor: s = -k + 2 pi i m / l
                m = round(s.imag * l / (2 * math.pi))
                if abs(s - complex(-k, 2 * math.pi * m / l)) < 1e-8:
                    raise ZetaError("log singular at zero")
                total += w * cmath.log(1 - cmath.exp(-(s + k) * l))
            return total
        Z, dZ = self.value_and_derivative(np.array([s]))
        Z, dZ = complex(Z[0]), complex(dZ[0])
        if Z == 0 or (dZ != 0 and abs(Z / dZ) < 1e-8):
            raise ZetaError("log singular at zero")
        return cmath.log(Z)


def zeta_value(s, spec: LengthSpectrum, p: ZetaParams) -> np.ndarray:
    return _Evaluator(spec, p).value_and_derivative(s)[0]


def log_derivative(s, spec: LengthSpectrum, p: ZetaParams) -> np.ndarray:
    return _Evaluator(spec, p).log_derivative(s)


def log_zeta(s: complex, spec: LengthSpectrum, p: ZetaParams) -> complex:
    """Logarithm of the zeta function.

    In product mode this is the sum of principal logarithms of the factors,
    taken in order of increasing length and then increasing k. In cycle mode
    it is the principal logarithm of the truncated expansion.
    """
    return _Evaluator(spec, p).log_zeta(complex(s))


# --- contour integration ---------------------------------------------------

_GL_X, _GL_W = leggauss(16)
QUAD_TOL = 1e-3
MIN_DISTANCE = 1e-4


def _edges(r: Region) -> list[tuple[complex, complex]]:
    a = complex(r.xmin, r.ymin)
    b = complex(r.xmax, r.ymin)
    c = complex(r.xmax, r.ymax)
    d = complex(r.xmin, r.ymax)
    return [(a, b), (b, c), (c, d), (d, a)]


def _contour_moments(ev: _Evaluator, region: Region, n_moments: int = 0, tol: float = QUAD_TOL,
                     min_distance: float = MIN_DISTANCE, max_depth: int = 40):
    """``(1/2 pi i) \\oint s^j Z'/Z ds`` for j = 0..n_moments, with an error bound.

    Raises ``ContourProximityError`` when a zero sits within ``min_distance``
    of the contour.
    """
    edges = _edges(region)
    perimeter = sum(abs(b - a) for a, b in edges)
    pending = []
    for e, (a, b) in enumerate(edges):
        n0 = max(1, int(math.ceil(abs(b - a) / 0.5)))
        for i in range(n0):
            pending.append((e, i / n0, (i + 1) / n0, 0))
    J = n_moments + 1
    total = np.zeros(J, dtype=complex)
    err = 0.0
    x_half = np.concatenate([(_GL_X - 1) / 2, (_GL_X + 1) / 2])
    w_half = np.concatenate([_GL_W, _GL_W]) / 2
    while pending:
        # nodes for the coarse rule on [ua, ub] plus the two half rules
        segs = []
        for e, ua, ub, depth in pending:
            a, b = edges[e]
            mid, half = (ua + ub) / 2, (ub - ua) / 2
            s_c = a + (mid + half * _GL_X) * (b - a)
            s_h = a + (mid + half * x_half) * (b - a)
            segs.append((s_c, s_h, (b - a) * half))
        s_all = np.concatenate([np.concatenate([s_c, s_h]) for s_c, s_h, _ in segs])
        f_all = ev.log_derivative(s_all)
        if not np.all(np.isfinite(f_all)) or np.abs(f_all).max() * min_distance > 1.0:
            raise ContourProximityError(region=region)
        powers = np.vstack([s_all**j for j in range(J)])
        vals = powers * f_all
        nxt = []
        step = 16 + 32
        for idx, ((e, ua, ub, depth), (s_c, s_h, jac)) in enumerate(zip(pending, segs)):
            v = vals[:, idx * step:(idx + 1) * step]
            i_c = (v[:, :16] * _GL_W).sum(axis=1) * jac
            i_h = (v[:, 16:] * w_half).sum(axis=1) * jac
            diff = abs(i_c[0] - i_h[0]) / (2 * math.pi)
            seg_len = abs(edges[e][1] - edges[e][0]) * (ub - ua)
            local_tol = tol * seg_len / perimeter
            # a node value |Z'/Z| ~ 1/d flags a zero at distance d; refine until
            # the segment is short on that scale so the proximity test can see it
            near = np.abs(f_all[idx * step:(idx + 1) * step]).max() * seg_len > 8.0
            if (diff <= local_tol and not near) or seg_len < min_distance:
                if diff > local_tol:
                    raise ContourProximityError(region=region)
                total += i_h
                err += diff
            elif depth >= max_depth:
                raise ContourProximityError(region=region)
            else:
                um = (ua + ub) / 2
                nxt.append((e, ua, um, depth + 1))
                nxt.append((e, um, ub, depth + 1))
        pending = nxt
    return total / (2j * math.pi), err


def count_zeros(region: Region, spec: LengthSpectrum, p: ZetaParams, *, tol: float = QUAD_TOL,
                min_distance: float = MIN_DISTANCE, _ev: Optional[_Evaluator] = None) -> int:
    """Number of zeros (with multiplicity) strictly inside ``region``."""
    ev = _ev or _Evaluator(spec, p)
    mom, err = _contour_moments(ev, region, 0, tol, min_distance)
    n = mom[0].real
    if err >= 0.1 or abs(n - round(n)) > 0.1 or abs(mom[0].imag) > 0.1:
        raise ContourProximityError(region=region)
    return int(round(n))


# --- zero search -----------------------------------------------------------

_SPLITS = (0.4734, 0.5381, 0.4119, 0.5927, 0.3583, 0.6452)
CLUSTER_CELL = 1e-2


def _quadrants(r: Region, fx: float, fy: float) -> list[Region]:
    xm = r.xmin + fx * (r.xmax - r.xmin)
    ym = r.ymin + fy * (r.ymax - r.ymin)
    return [
        Region(r.xmin, xm, r.ymin, ym),
        Region(xm, r.xmax, r.ymin, ym),
        Region(r.xmin, xm, ym, r.ymax),
        Region(xm, r.xmax, ym, r.ymax),
    ]


def _newton(ev: _Evaluator, s0: complex, mult: int, cell: Region, max_iter: int = 50) -> complex:
    s = s0
    step = math.inf
    for _ in range(max_iter):
        f = complex(ev.log_derivative(np.array([s]))[0])
        if not cmath.isfinite(f):
            return s
        if f == 0:
            break
        step = mult / f
        s -= step
        if abs(step) <= 1e-14 * max(1.0, abs(s)):
            return s
    # stagnation at rounding level counts as converged
    if abs(step) <= 1e-11 * max(1.0, abs(s)):
        return s
    raise NewtonError(f"Newton iteration did not converge in cell {cell.as_list()}", cell)


def _power_sums_to_roots(power_sums: np.ndarray, n: int) -> np.ndarray:
    # Newton identities: e_k from p_1..p_k, then roots of the monic polynomial.
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        acc = 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * power_sums[i]
        e.append(acc / k)
    coeffs = [(-1) ** k * e[k] for k in range(n + 1)]
    return np.roots(coeffs)


def _resolve_cell(ev: _Evaluator, cell: Region, n: int, spec, p) -> list[Zero]:
    mom, _ = _contour_moments(ev, cell, n)
    roots = _power_sums_to_roots(mom, n)
    # cluster coincident roots into multiple zeros
    roots = sorted(roots, key=lambda z: (z.real, z.imag))
    clusters: list[list[complex]] = []
    for z in roots:
        for c in clusters:
            if abs(z - np.mean(c)) < 1e-5 * max(1.0, cell.diameter):
                c.append(z)
                break
        else:
            clusters.append([z])
    out = []
    for c in clusters:
        out.extend(_polish_cluster(ev, c, cell))
    return out


def _polish_cluster(ev: _Evaluator, c: list[complex], cell: Region) -> list[Zero]:
    """Refine a cluster of moment roots.

    Members are first polished one by one; if they land on distinct points
    the cluster was a group of close simple zeros. Otherwise it is one zero
    of multiplicity ``len(c)`` and the multiplicity-aware Newton step is used.
    """
    m = len(c)
    singles = None
    if m > 1:
        try:
            singles = [_newton(ev, complex(z), 1, cell) for z in c]
        except NewtonError:
            # values at the rounding floor (e.g. the nearly double zero at s=0
            # of the cycle expansion): keep the contour-moment roots unpolished
            if all(cell.contains(complex(z)) for z in c):
                log.warning("zeros in cell %s kept at contour-moment accuracy", cell.as_list())
                singles = [complex(z) for z in c]
        if singles is not None:
            tol = 1e-9 * max(1.0, cell.diameter)
            distinct = all(abs(a - b) > tol for i, a in enumerate(singles) for b in singles[i + 1:])
            if not distinct:
                singles = None
    if singles is not None:
        pts = [(z, 1) for z in singles]
    else:
        pts = [(_newton(ev, complex(np.mean(c)), m, cell), m)]
    out = []
    for z, k in pts:
        if not cell.grow(1e-6).contains(z):
            raise NewtonError(f"Newton left the cell {cell.as_list()}", cell)
        out.append(Zero(z, k))
    return out


def find_zeros(region: Region, spec: LengthSpectrum, p: ZetaParams) -> ZeroList:
    """Locate all zeros in ``region`` by subdivision, moments and Newton refinement."""
    ev = _Evaluator(spec, p)
    total = count_zeros(region, spec, p, _ev=ev)
    zeros: list[Zero] = []
    stack = [(region, total)]
    while stack:
        cell, n = stack.pop()
        if n == 0:
            continue
        if n == 1 or max(cell.xmax - cell.xmin, cell.ymax - cell.ymin) <= CLUSTER_CELL:
            zeros.extend(_resolve_cell(ev, cell, n, spec, p))
            continue
        for fx, fy in zip(_SPLITS, _SPLITS[::-1]):
            kids = _quadrants(cell, fx, fy)
            try:
                counts = [count_zeros(k, spec, p, _ev=ev) for k in kids]
            except ContourProximityError:
                continue
            if sum(counts) == n:
                stack.extend(zip(kids, counts))
                break
        else:
            raise NewtonError(f"could not subdivide cell {cell.as_list()}", cell)
    zeros.sort(key=lambda z: (z.s.imag, z.s.real))
    return ZeroList(zeros, region, p, {"count": total})


# --- dimension from the real zero -------------------------------------------


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    sensitivity: float
    word_length_L: int

    def __float__(self) -> float:
        return self.value


def _largest_real_zero(ev: _Evaluator, lo: float = -0.02, hi: float = 1.0, n: int = 409) -> Optional[float]:
    grid = np.linspace(lo, hi, n)
    z = ev.value_and_derivative(grid)[0].real
    f = lambda x: float(ev.value_and_derivative(np.array([x]))[0][0].real)
    scale = np.abs(z).max()
    for i in range(n - 2, -1, -1):
        if z[i] == 0:
            return float(grid[i])
        if z[i] * z[i + 1] < 0:
            x = brentq(f, grid[i], grid[i + 1], xtol=1e-15)
            return x
        # even-order zero: local minimum of |Z| touching zero
        if 0 < i < n - 1 and abs(z[i]) <= abs(z[i - 1]) and abs(z[i]) <= abs(z[i + 1]):
            res = minimize_scalar(lambda x: abs(f(x)), bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                  tol=1e-12)
            if abs(res.fun) <= 1e-10 * scale:
                return float(res.x)
    return None


def delta_from_zeta(spec: LengthSpectrum, p: ZetaParams) -> DeltaEstimate:
    """Largest real zero of the cycle-expanded zeta in (0, 1)."""
    L = p.word_length_L or spec.cutoff_word_length
    if L is None:
        raise ValueError("delta needs a word-length truncation")
    p = ZetaParams(p.k_max, L)
    x = _largest_real_zero(_Evaluator(spec, p))
    if x is None:
        raise ZetaError("no real zero found in (0,1)")
    sens = float("nan")
    if L > 1:
        x1 = _largest_real_zero(_Evaluator(spec.restrict(L - 1), ZetaParams(p.k_max, L - 1)))
        if x1 is not None:
            sens = abs(x - x1)
    return DeltaEstimate(float(x), sens, L)
