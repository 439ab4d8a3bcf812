"""Limit-set sampling and dimension estimates."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .groups import Circle, GeneratorSystem, group_hash
from .moebius import batch_apply, batch_attracting_fixed_point, batch_is_loxodromic
from .svg import Canvas
from .words import letter_key

DEDUP_TOL = 1e-9


@dataclass
class PointCloud:
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y"])
            for z in self.points:
                w.writerow([repr(float(z.real)), repr(float(z.imag))])

    @classmethod
    def from_csv(cls, path) -> "PointCloud":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        pts = np.array([complex(float(r["x"]), float(r["y"])) for r in rows])
        return cls(pts, {"source": str(path)})


@dataclass
class DimensionEstimate:
    value: float
    stderr: float
    scales_used: list[float]
    counts: list[int]

    def to_json(self) -> dict:
        return asdict(self)


def _letter_index(k: int) -> list[int]:
    # position of each letter in GeneratorSystem.letter_matrices order
    from .words import letters

    return letters(k)


def word_matrix_levels(g: GeneratorSystem, L: int, first_letter: Optional[int] = None):
    """Yield ``(n, matrices, last_letter_index)`` for reduced words of length n = 1..L.

    Matrices are stacked as an (N, 2, 2) array of left-to-right products.
    Letters are indexed in the order +1, -1, +2, -2, ...; the inverse of index
    ``i`` is ``i ^ 1``.
    """
    G = g.letter_matrices()
    n_letters = len(G)
    if first_letter is None:
        idx = np.arange(n_letters)
    else:
        idx = np.array([letter_key(first_letter)])
    mats = G[idx]
    last = idx
    yield 1, mats, last
    for n in range(2, L + 1):
        new_m, new_last = [], []
        for j in range(n_letters):
            keep = last != (j ^ 1)
            new_m.append(mats[keep] @ G[j])
            new_last.append(np.full(keep.sum(), j))
        mats = np.concatenate(new_m)
        last = np.concatenate(new_last)
        yield n, mats, last


def dedupe(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    keys = np.stack([np.round(points.real / tol), np.round(points.imag / tol)], axis=1)
    _, first = np.unique(keys, axis=0, return_index=True)
    return points[np.sort(first)]


def sample_limit_set(g: GeneratorSystem, L: int, mode: str = "fixed_points",
                     base_point: complex = 0j) -> PointCloud:
    """Points of the limit set from all reduced words of length exactly L.

    ``mode="fixed_points"`` takes attracting fixed points of loxodromic words
    (these lie exactly on the limit set); ``mode="orbit"`` maps
    ``base_point`` by every word and is kept for debugging.
    """
    if L < 2:
        raise ValueError("need L >= 2")
    chunks = []
    skipped = 0
    total = 0
    for first in _letter_index(g.k):
        for n, mats, _ in word_matrix_levels(g, L, first):
            if n != L:
                continue
            total += len(mats)
            if mode == "orbit":
                pts = batch_apply(mats, np.full(len(mats), base_point, dtype=complex))
            elif mode == "fixed_points":
                lox = batch_is_loxodromic(mats)
                skipped += int((~lox).sum())
                pts = batch_attracting_fixed_point(mats[lox])
            else:
                raise ValueError(f"unknown sampling mode {mode!r}")
            chunks.append(pts[np.isfinite(pts)])
    pts = np.concatenate(chunks) if chunks else np.array([], dtype=complex)
    pts = dedupe(pts)
    if len(pts) == 0:
        raise ValueError("degenerate group for sampling")
    meta = {"L": L, "group": g.kind, "group_hash": group_hash(g), "words": total,
            "skipped_non_loxodromic": skipped, "mode": mode}
    return PointCloud(pts, meta)


def box_counts(points: np.ndarray, eps: float) -> int:
    ix = np.floor(points.real / eps).astype(np.int64)
    iy = np.floor(points.imag / eps).astype(np.int64)
    iy -= iy.min()
    return len(np.unique(ix * (int(iy.max()) + 1) + iy))


def box_dimension(cloud: PointCloud, eps_min: float = 1e-3, eps_max: float = 1e-1,
                  n_scales: int = 12, min_points_per_box: float = 4.0) -> DimensionEstimate:
    """Box-counting dimension: minus the slope of log N(eps) against log eps.

    Boxes are axis-aligned on a grid anchored at the origin. Scales where the
    cloud averages fewer than ``min_points_per_box`` points per occupied box
    are below the sampling resolution and are dropped.
    """
    pts = np.asarray(cloud.points)
    if len(pts) < 100:
        raise ValueError("box counting needs at least 100 points")
    if not eps_min < eps_max:
        raise ValueError("need eps_min < eps_max")
    scales = np.geomspace(eps_min, eps_max, n_scales)
    used, counts = [], []
    for eps in scales:
        n = box_counts(pts, eps)
        if n >= 2 and len(pts) / n >= min_points_per_box:
            used.append(float(eps))
            counts.append(int(n))
    if len(used) < 3:
        raise ValueError("insufficient scale range")
    x = np.log(used)
    y = np.log(counts)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = coef[0]
    dof = len(x) - 2
    resid = y - A @ coef
    if dof > 0:
        s2 = float(resid @ resid) / dof
        stderr = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    else:
        stderr = 0.0
    return DimensionEstimate(float(-slope), stderr, used, counts)


def hausdorff_distance(a: np.ndarray, b: np.ndarray, chunk: int = 2048) -> float:
    from scipy.spatial import cKDTree

    pa = np.stack([a.real, a.imag], axis=1)
    pb = np.stack([b.real, b.imag], axis=1)
    d1 = cKDTree(pb).query(pa)[0].max()
    d2 = cKDTree(pa).query(pb)[0].max()
    return float(max(d1, d2))


# --- orbital counting --------------------------------------------------------


def _image_circles(mats: np.ndarray, circles: list[Circle]) -> tuple[np.ndarray, np.ndarray]:
    """Centers and radii of ``mats[i]`` applied to ``circles[i]``.

    The image center is the image of the point inverse to the pole of the
    map with respect to the circle; this stays accurate for tiny images,
    unlike circumcircles of three image points.
    """
    c0 = np.array([ci.center for ci in circles])
    r0 = np.array([ci.radius for ci in circles])
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        pole = np.where(c == 0, np.inf, -d / c)
        inv = np.where(np.isfinite(pole), c0 + r0**2 / np.conj(pole - c0), c0)
    center = batch_apply(mats, inv)
    radius = np.abs(batch_apply(mats, c0 + r0) - center)
    return center, radius


def orbit_distances(g: GeneratorSystem, L: int) -> tuple[np.ndarray, float]:
    """Hyperbolic distances ``d(0, w 0)`` for reduced words ``|w| <= L``.

    Also returns the radius up to which the list is complete: every longer
    word moves 0 into a level-L disk, which lies beyond that distance.
    """
    letters_ordered = _letter_index(g.k)
    targets = [g.target_disk(x) for x in letters_ordered]
    dists = [np.zeros(1)]
    complete = np.inf
    prev_mats = None
    prev_last = None
    for n, mats, last in word_matrix_levels(g, L):
        z = batch_apply(mats, np.zeros(len(mats), dtype=complex))
        dists.append(2 * np.arctanh(np.minimum(np.abs(z), 1 - 1e-16)))
        if n == L:
            # level-L disk of w = u x is u(target disk of x)
            if prev_mats is None:
                parents = np.broadcast_to(np.eye(2, dtype=complex), mats.shape)
            else:
                parents = mats @ _inverse_stack(g.letter_matrices()[last])
            center, radius = _image_circles(parents, [targets[i] for i in last])
            nearest = np.abs(center) - radius
            complete = float(np.min(2 * np.arctanh(np.clip(nearest, 0, 1 - 1e-16))))
        prev_mats, prev_last = mats, last
    return np.concatenate(dists), complete


def _inverse_stack(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out


def poincare_abscissa(g: GeneratorSystem, L: int, window: tuple[float, float] = (0.5, 1.0),
                      n_grid: int = 200) -> float:
    """Exponential growth rate of the orbit counting function of 0.

    ``M(T) = #{|w| <= L : d(0, w 0) <= T}`` is exact for T up to the
    completeness radius; log M is fitted linearly in T over the given
    fraction of that range.
    """
    if not g.schottky_flag:
        raise ValueError("orbital counting requires free ping-pong group")
    if L < 4:
        raise ValueError("need L >= 4")
    d, t_complete = orbit_distances(g, L)
    d = np.sort(d)
    T = np.linspace(window[0] * t_complete, window[1] * t_complete, n_grid)
    M = np.searchsorted(d, T, side="right")
    slope = np.polyfit(T, np.log(M), 1)[0]
    return float(slope)


VIEW = 1.1


def render_svg(cloud: PointCloud, path, title: str = "", show_unit_circle: bool = True,
               show_disks: Optional[list[Circle]] = None) -> None:
    """Scatter plot of the cloud on the fixed window ``[-1.1, 1.1]^2``.

    Points are merged per pixel so the file size stays bounded; the dot
    radius shrinks as the cloud grows.
    """
    cv = Canvas(-VIEW, VIEW, -VIEW, VIEW)
    if show_unit_circle:
        cv.ring(0.0, 0.0, 1.0, stroke="#bbbbbb")
    for c in show_disks or []:
        cv.ring(c.center.real, c.center.imag, c.radius, stroke="#88aadd")
    pts = np.asarray(cloud.points)
    pts = pts[(np.abs(pts.real) <= VIEW) & (np.abs(pts.imag) <= VIEW)]
    radius = float(np.clip(3.0 / math.sqrt(max(len(pts), 1) / 1000.0), 0.6, 3.0))
    pix = 2 * VIEW / 1000
    cells = np.unique(np.stack([np.round(pts.real / pix), np.round(pts.imag / pix)], axis=1), axis=0)
    for ix, iy in cells:
        cv.circle(ix * pix, iy * pix, radius)
    cv.save(path, title)
