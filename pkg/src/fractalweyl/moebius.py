"""Moebius transformations of the Riemann sphere.

Maps are stored as SL(2, C) matrices ``[[a, b], [c, d]]`` normalized to
determinant one. The matrix is only defined up to sign; nothing downstream
branches on the sign.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

CLASSIFY_TOL = 1e-10


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

ExtendedComplex = Union[complex, _Infinity]


def is_inf(z) -> bool:
    return z is INF


@dataclass(frozen=True)
class MoebiusMap:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(x) for x in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if det == 0 or not cmath.isfinite(det):
            raise ValueError(f"singular or non-finite matrix (det={det})")
        s = cmath.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)
        object.__setattr__(self, "c", c / s)
        object.__setattr__(self, "d", d / s)

    @classmethod
    def _unchecked(cls, a: complex, b: complex, c: complex, d: complex) -> "MoebiusMap":
        # Products and inverses of determinant-one matrices: renormalizing by a
        # recomputed ad - bc would only inject cancellation error.
        f = object.__new__(cls)
        object.__setattr__(f, "a", a)
        object.__setattr__(f, "b", b)
        object.__setattr__(f, "c", c)
        object.__setattr__(f, "d", d)
        return f

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_array(cls, m) -> "MoebiusMap":
        m = np.asarray(m)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def __call__(self, z: ExtendedComplex) -> ExtendedComplex:
        return apply(self, z)

    def inverse(self) -> "MoebiusMap":
        return inverse(self)

    def isclose(self, other: "MoebiusMap", tol: float = 1e-9) -> bool:
        """Equality as maps, i.e. up to the overall sign of the matrix."""
        x = np.array([self.a, self.b, self.c, self.d])
        y = np.array([other.a, other.b, other.c, other.d])
        return min(np.abs(x - y).max(), np.abs(x + y).max()) <= tol


def compose(f: MoebiusMap, g: MoebiusMap) -> MoebiusMap:
    """Matrix product ``f g``, acting as ``z -> f(g(z))``."""
    return MoebiusMap._unchecked(
        f.a * g.a + f.b * g.c,
        f.a * g.b + f.b * g.d,
        f.c * g.a + f.d * g.c,
        f.c * g.b + f.d * g.d,
    )


def inverse(f: MoebiusMap) -> MoebiusMap:
    return MoebiusMap._unchecked(f.d, -f.b, -f.c, f.a)


def conjugate_by(h: MoebiusMap, f: MoebiusMap) -> MoebiusMap:
    """Return ``h f h^-1``."""
    return compose(compose(h, f), inverse(h))


def apply(f: MoebiusMap, z: ExtendedComplex) -> ExtendedComplex:
    if z is INF:
        if f.c == 0:
            return INF
        return f.a / f.c
    z = complex(z)
    num = f.a * z + f.b
    den = f.c * z + f.d
    if abs(den) <= 1e-15 * (abs(f.c * z) + abs(f.d)):
        return INF
    return num / den


def classify(f: MoebiusMap, tol: float = CLASSIFY_TOL) -> str:
    """One of ``identity``, ``parabolic``, ``elliptic``, ``loxodromic``."""
    if abs(f.b) <= tol and abs(f.c) <= tol and abs(f.a - f.d) <= tol:
        return "identity"
    t2 = f.trace**2
    if abs(t2 - 4) < tol:
        return "parabolic"
    if abs(t2.imag) < tol and -tol <= t2.real < 4:
        return "elliptic"
    return "loxodromic"


def _large_eigenvalue(t: complex) -> complex:
    """Root of ``x^2 - t x + 1`` with modulus >= 1."""
    s = cmath.sqrt(t * t - 4)
    if abs(t - s) > abs(t + s):
        s = -s
    return (t + s) / 2


def multiplier(f: MoebiusMap) -> complex:
    """Multiplier ``k`` of the normal form ``w -> k w``, with ``|k| >= 1``."""
    lam = _large_eigenvalue(f.trace)
    return lam * lam


def _fixed_point_for(f: MoebiusMap, lam: complex) -> ExtendedComplex:
    # f(z) = z with c z + d = lam, equivalently a z + b = lam z.
    den1 = f.c
    den2 = lam - f.a
    if abs(den1) >= abs(den2):
        if den1 == 0:
            return INF
        return (lam - f.d) / den1
    return f.b / den2


def fixed_points(f: MoebiusMap) -> tuple[ExtendedComplex, ExtendedComplex]:
    """Fixed points of ``f`` on the sphere.

    For loxodromic maps the attracting point comes first. Parabolic maps
    return the double point twice.
    """
    kind = classify(f)
    if kind == "identity":
        raise ValueError("no isolated fixed points")
    if kind == "parabolic":
        if abs(f.c) <= CLASSIFY_TOL:
            return INF, INF
        z = (f.a - f.d) / (2 * f.c)
        return z, z
    if f.c == 0:
        # upper triangular: fixed points inf and b / (d - a); inf attracts iff |a| > |d|
        other = f.b / (f.d - f.a)
        return (INF, other) if abs(f.a) > abs(f.d) else (other, INF)
    lam = _large_eigenvalue(f.trace)
    # multiplier at a fixed point z is 1 / (c z + d)^2
    return _fixed_point_for(f, lam), _fixed_point_for(f, 1 / lam)


@dataclass(frozen=True)
class ComplexLength:
    l: float
    theta: float

    @property
    def value(self) -> complex:
        return complex(self.l, self.theta)


def complex_length(f: MoebiusMap) -> ComplexLength:
    """Translation length and holonomy angle of a loxodromic map."""
    if classify(f) != "loxodromic":
        raise ValueError("no positive translation length")
    lam = _large_eigenvalue(f.trace)
    l = 2.0 * math.log(abs(lam))
    theta = math.remainder(2.0 * cmath.phase(lam), 2.0 * math.pi)
    if theta <= -math.pi:
        theta += 2.0 * math.pi
    return ComplexLength(l, theta)


# --- batched helpers over stacks of 2x2 matrices --------------------------


def batch_normalize(m: np.ndarray) -> np.ndarray:
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return m / np.sqrt(det)[..., None, None]


def batch_is_loxodromic(m: np.ndarray, tol: float = CLASSIFY_TOL) -> np.ndarray:
    t2 = (m[..., 0, 0] + m[..., 1, 1]) ** 2
    near_par = np.abs(t2 - 4) < tol
    ell = (np.abs(t2.imag) < tol) & (t2.real >= -tol) & (t2.real < 4)
    return ~(near_par | ell)


def batch_attracting_fixed_point(m: np.ndarray) -> np.ndarray:
    """Attracting fixed points of a stack of determinant-one loxodromic matrices.

    ``np.inf`` marks the point at infinity.
    """
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    t = a + d
    s = np.sqrt(t * t - 4)
    s = np.where(np.abs(t - s) > np.abs(t + s), -s, s)
    lam = (t + s) / 2
    den2 = lam - a
    use_c = np.abs(c) >= np.abs(den2)
    with np.errstate(divide="ignore", invalid="ignore"):
        z1 = (lam - d) / c
        z2 = b / den2
        tri = np.where(np.abs(a) > np.abs(d), np.inf, b / (d - a))
    z = np.where(use_c, z1, z2)
    return np.where(c == 0, tri, z)


def batch_apply(m: np.ndarray, z: np.ndarray) -> np.ndarray:
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return (a * z + b) / (c * z + d)
