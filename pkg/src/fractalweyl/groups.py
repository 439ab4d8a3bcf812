"""Schottky groups, the genus-2 octagon group and its quasifuchsian bendings."""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .moebius import INF, MoebiusMap, apply, compose, conjugate_by, inverse
from .words import GroupWord, is_reduced

BEND_BOUND = 0.8


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"circle radius must be finite and positive, got {self.radius}")
        object.__setattr__(self, "center", complex(self.center))

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        """Strict interior test (``tol`` shrinks the disk)."""
        return abs(complex(z) - self.center) < self.radius - tol

    def sample(self, n: int = 64) -> np.ndarray:
        t = 2 * np.pi * (np.arange(n) + 0.5) / n
        return self.center + self.radius * np.exp(1j * t)

    def image(self, f: MoebiusMap) -> "Circle":
        """Image circle under ``f``; raises if the image is a line."""
        pts = []
        for t in (0.0, 2 * math.pi / 3, 4 * math.pi / 3):
            w = apply(f, self.center + self.radius * cmath.exp(1j * t))
            if w is INF:
                raise ValueError("circle image passes through infinity")
            pts.append(w)
        return circumcircle(*pts)


def circumcircle(z1: complex, z2: complex, z3: complex) -> Circle:
    # solve |z - c|^2 = R^2 for the three points
    ax, ay = z1.real, z1.imag
    bx, by = z2.real, z2.imag
    cx, cy = z3.real, z3.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-14:
        raise ValueError("collinear points have no circumcircle")
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    center = complex(ux, uy)
    return Circle(center, abs(z1 - center))


def orthogonal_circle(angle: float, half_width: float) -> Circle:
    """Circle orthogonal to the unit circle cutting out the arc ``angle +- half_width``."""
    if not 0 < half_width < math.pi / 2:
        raise ValueError("half_width must lie in (0, pi/2)")
    return Circle(cmath.exp(1j * angle) / math.cos(half_width), math.tan(half_width))


def pairing_map(src: Circle, dst: Circle) -> MoebiusMap:
    """Map sending the exterior of ``src`` onto the interior of ``dst``.

    Both circles must be orthogonal to the unit circle and mirror images under
    the reflection through the line bisecting their center directions. The
    map is that reflection composed with inversion in ``src``; it preserves
    the unit disk.
    """
    P = src.center
    beta = cmath.phase(P) + cmath.phase(dst.center)
    rot = cmath.exp(1j * beta)
    r2 = src.radius**2
    return MoebiusMap(rot * P.conjugate(), rot * (r2 - abs(P) ** 2), 1, -P)


@dataclass(frozen=True)
class GeneratorSystem:
    """Generators with their paired disks.

    Generator ``i`` maps the exterior of ``pairing[i][0]`` onto the interior
    of ``pairing[i][1]``.
    """

    generators: tuple[MoebiusMap, ...]
    pairing: tuple[tuple[Circle, Circle], ...]
    schottky_flag: bool
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def circles(self) -> list[Circle]:
        return [c for pair in self.pairing for c in pair]

    def letter_map(self, x: int) -> MoebiusMap:
        g = self.generators[abs(x) - 1]
        return g if x > 0 else inverse(g)

    def letter_matrices(self) -> np.ndarray:
        """Stack of matrices in letter order +1, -1, +2, -2, ..."""
        mats = []
        for g in self.generators:
            mats.append(g.as_array())
            mats.append(inverse(g).as_array())
        return np.array(mats)

    def target_disk(self, x: int) -> Circle:
        """Disk that letter ``x`` maps the outside of its source disk into."""
        src, dst = self.pairing[abs(x) - 1]
        return dst if x > 0 else src

    def to_json(self) -> dict:
        return group_to_json(self)

    def digest(self) -> str:
        return group_hash(self)


def word_matrix(w: GroupWord, g: GeneratorSystem) -> MoebiusMap:
    """Left-to-right product of the letters of ``w``."""
    if not is_reduced(w):
        raise ValueError(f"word {w} is not reduced")
    m = MoebiusMap.identity()
    for x in w:
        if not 1 <= abs(x) <= g.k:
            raise ValueError(f"letter {x} out of range for {g.k} generators")
        m = compose(m, g.letter_map(x))
    return m


def disks_disjoint(circles: Sequence[Circle]) -> bool:
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            ci, cj = circles[i], circles[j]
            if abs(ci.center - cj.center) <= ci.radius + cj.radius:
                return False
    return True


def verify_ping_pong(g: GeneratorSystem, n_samples: int = 64) -> bool:
    """Boundary-sample check of the ping-pong property.

    For each letter, points on every disk boundary other than the letter's
    source disk must land strictly inside its target disk.
    """
    for i, (src, dst) in enumerate(g.pairing):
        for x, a, b in ((i + 1, src, dst), (-(i + 1), dst, src)):
            f = g.letter_map(x)
            for c in g.circles:
                if c == a:
                    continue
                for z in c.sample(n_samples):
                    if a.contains(z):
                        continue
                    w = apply(f, z)
                    if w is INF or not b.contains(w):
                        return False
    return True


def build_symmetric_schottky(k: int, angle_gap: float) -> GeneratorSystem:
    """k generators pairing 2k equal circles orthogonal to the unit circle.

    Circle centers sit at angles ``pi j / k``; neighbouring circles are
    separated by an arc of ``angle_gap`` on the unit circle. Generator ``i``
    pairs circles ``2i`` and ``2i + 1``, so k = 2 gives a three-funnel surface.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    half = (math.pi / k - angle_gap) / 2
    if angle_gap <= 0 or half <= 0:
        raise ValueError("not a Schottky configuration")
    circles = [orthogonal_circle(math.pi * j / k, half) for j in range(2 * k)]
    if not disks_disjoint(circles):
        raise ValueError("not a Schottky configuration")
    pairing = tuple((circles[2 * i], circles[2 * i + 1]) for i in range(k))
    gens = tuple(pairing_map(a, b) for a, b in pairing)
    g = GeneratorSystem(gens, pairing, True, "schottky", {"k": k, "angle_gap": angle_gap})
    if not verify_ping_pong(g):
        raise ValueError("not a Schottky configuration")
    return g


# Regular hyperbolic octagon with interior angles pi/4 (area 4 pi).
# Vertex circumradius R: cosh R = cot(pi/8) cot(pi/8) = 3 + 2 sqrt 2, and the
# Euclidean vertex radius in the disk is tanh(R/2). A side through the vertices
# at angles +-pi/8 lies on the circle orthogonal to the unit circle with center
# distance (r_v^2 + 1) / (2 r_v cos(pi/8)).
OCTAGON_COSH_CIRCUMRADIUS = 3.0 + 2.0 * math.sqrt(2.0)
OCTAGON_VERTEX_RADIUS = math.tanh(math.acosh(OCTAGON_COSH_CIRCUMRADIUS) / 2)
OCTAGON_CENTER_DIST = (OCTAGON_VERTEX_RADIUS**2 + 1) / (2 * OCTAGON_VERTEX_RADIUS * math.cos(math.pi / 8))
OCTAGON_RADIUS = math.sqrt(OCTAGON_CENTER_DIST**2 - 1)
OCTAGON_NEAREST = OCTAGON_CENTER_DIST - OCTAGON_RADIUS
# C_1 sits at angle -3 pi / 8 so that two opposite vertices are at -i and i.
# The diagonal between them is the axis of [A1^-1, B1]; C_1..C_4 lie to its
# right and C_5..C_8 to its left, which is what bending by M_theta requires.
OCTAGON_FIRST_ANGLE = -3 * math.pi / 8


def octagon_circles() -> list[Circle]:
    """C_1..C_8 counterclockwise, starting below the positive real axis."""
    return [Circle(OCTAGON_CENTER_DIST * cmath.exp(1j * (OCTAGON_FIRST_ANGLE + math.pi * j / 4)), OCTAGON_RADIUS)
            for j in range(8)]


def build_octagon_fuchsian() -> GeneratorSystem:
    """Cocompact genus-2 surface group from the regular octagon.

    A1: C1 -> C3, B1: C2 -> C4, A2: C5 -> C7, B2: C6 -> C8 (exterior onto
    interior). The circles touch at the octagon vertices, so this is not a
    Schottky configuration.
    """
    c = octagon_circles()
    pairing = ((c[0], c[2]), (c[1], c[3]), (c[4], c[6]), (c[5], c[7]))
    gens = tuple(pairing_map(a, b) for a, b in pairing)
    return GeneratorSystem(gens, pairing, False, "octagon", {"theta": 0.0})


def rotation_fixing_pm_i(theta: float) -> MoebiusMap:
    """Sphere rotation by ``theta`` about the axis through i and -i.

    Positive angles move the real line to the left. Built as
    ``phi^-1 o (w -> e^{-i theta} w) o phi`` with ``phi(z) = (z - i)/(z + i)``;
    the sign of the exponent fixes the orientation.
    """
    if not -math.pi <= theta <= math.pi:
        raise ValueError("theta must lie in [-pi, pi]")
    phi = MoebiusMap(1, -1j, 1, 1j)
    rot = MoebiusMap(cmath.exp(-0.5j * theta), 0, 0, cmath.exp(0.5j * theta))
    return compose(inverse(phi), compose(rot, phi))


def bend(base: GeneratorSystem, theta: float, bound: float = BEND_BOUND) -> GeneratorSystem:
    """Quasifuchsian bending: conjugate A1 and B1 by the rotation M_theta."""
    if base.kind != "octagon":
        raise ValueError("bending is defined for the octagon group")
    if abs(theta) > bound:
        raise ValueError("bending angle outside validated range")
    if theta == 0:
        return base
    m = rotation_fixing_pm_i(theta)
    gens = list(base.generators)
    pairing = list(base.pairing)
    for i in (0, 1):
        gens[i] = conjugate_by(m, gens[i])
        src, dst = pairing[i]
        pairing[i] = (src.image(m), dst.image(m))
    return GeneratorSystem(tuple(gens), tuple(pairing), False, "bent", {"theta": theta})


# --- JSON ------------------------------------------------------------------


def _map_to_list(f: MoebiusMap) -> list[float]:
    return [f.a.real, f.a.imag, f.b.real, f.b.imag, f.c.real, f.c.imag, f.d.real, f.d.imag]


def _map_from_list(v: Sequence[float]) -> MoebiusMap:
    if len(v) != 8:
        raise ValueError("generator needs 8 numbers")
    a, b, c, d = (complex(v[i], v[i + 1]) for i in (0, 2, 4, 6))
    det = a * d - b * c
    if cmath.isfinite(det) and abs(det - 1) <= 1e-12:
        # already normalized: keep the stored bits so hashes round-trip
        return MoebiusMap._unchecked(a, b, c, d)
    return MoebiusMap(a, b, c, d)


def group_to_json(g: GeneratorSystem) -> dict:
    type_ = {"schottky": "schottky", "octagon": "octagon", "bent": "bent"}.get(g.kind, "schottky")
    doc = {
        "type": type_,
        "k": g.k,
        "theta": g.params.get("theta", 0.0),
        "circles": [{"cx": c.center.real, "cy": c.center.imag, "r": c.radius} for c in g.circles],
        "generators": [_map_to_list(f) for f in g.generators],
    }
    if "angle_gap" in g.params:
        doc["angle_gap"] = g.params["angle_gap"]
    return doc


def group_from_json(doc: dict) -> GeneratorSystem:
    """Build a group from its JSON document.

    Explicit ``generators``/``circles`` take precedence; otherwise the group
    is rebuilt from ``type`` and its parameters.
    """
    type_ = doc.get("type")
    if type_ not in ("schottky", "octagon", "bent"):
        raise ValueError(f"type: unknown group type {type_!r}")
    if "generators" in doc and "circles" in doc:
        gens = tuple(_map_from_list(v) for v in doc["generators"])
        circles = [Circle(complex(c["cx"], c["cy"]), c["r"]) for c in doc["circles"]]
        if len(circles) != 2 * len(gens):
            raise ValueError("circles: need two circles per generator")
        pairing = tuple((circles[2 * i], circles[2 * i + 1]) for i in range(len(gens)))
        params = {"theta": float(doc.get("theta", 0.0))}
        if "angle_gap" in doc:
            params["angle_gap"] = float(doc["angle_gap"])
        if type_ == "schottky":
            params["k"] = len(gens)
            flag = disks_disjoint(circles)
        else:
            flag = False
        return GeneratorSystem(gens, pairing, flag, type_, params)
    if type_ == "octagon":
        return build_octagon_fuchsian()
    if type_ == "bent":
        return bend(build_octagon_fuchsian(), float(doc["theta"]))
    return build_symmetric_schottky(int(doc["k"]), float(doc["angle_gap"]))


def group_hash(g: GeneratorSystem) -> str:
    doc = group_to_json(g)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def poincare_ball_distance(z: complex) -> float:
    return 2.0 * math.atanh(abs(z))
