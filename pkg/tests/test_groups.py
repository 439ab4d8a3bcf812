import cmath
import json
import math

import numpy as np
import pytest

from fractalweyl.groups import (OCTAGON_NEAREST, bend, build_octagon_fuchsian, build_symmetric_schottky,
                                group_from_json, group_hash, group_to_json, rotation_fixing_pm_i,
                                verify_ping_pong, word_matrix)
from fractalweyl.moebius import MoebiusMap, apply, classify, complex_length, compose, inverse
from fractalweyl.words import canonical_form, enumerate_words, invert, primitive_classes

# independent oracle: the inradius r of the regular octagon with angles pi/4
# has cosh r = 1 + sqrt 2, and tanh(r/2) is its Euclidean distance in the disk
RHO0 = math.tanh(math.acosh(1 + math.sqrt(2)) / 2)


def commutator(x, y):
    return compose(compose(x, y), compose(inverse(x), inverse(y)))


def test_octagon_circles(octagon):
    cs = octagon.circles
    assert len(cs) == 8
    for c in cs:
        assert abs(abs(c.center) ** 2 - (1 + c.radius**2)) < 1e-12
        assert abs(abs(c.center) - c.radius - OCTAGON_NEAREST) < 1e-12
    assert abs(OCTAGON_NEAREST - 0.6435942529055825) < 1e-15
    assert abs(OCTAGON_NEAREST - RHO0) < 1e-12
    assert octagon.schottky_flag is False


def test_octagon_vertex_angles(octagon):
    cs = sorted(octagon.circles, key=lambda c: cmath.phase(c.center))
    total = 0.0
    for j in range(8):
        a, b = cs[j], cs[(j + 1) % 8]
        d = abs(a.center - b.center)
        cos_beta = (a.radius**2 + b.radius**2 - d**2) / (2 * a.radius * b.radius)
        angle = math.pi - math.acos(cos_beta)
        assert abs(angle - math.pi / 4) < 1e-12
        total += angle
    # Gauss-Bonnet: area = 6 pi - sum of angles = 4 pi
    assert abs((8 - 2) * math.pi - total - 4 * math.pi) < 1e-12


def test_octagon_pairings(octagon):
    # generator i maps the source circle onto the target circle
    for f, (src, dst) in zip(octagon.generators, octagon.pairing):
        for z in src.sample(16):
            w = apply(f, z)
            assert abs(abs(w - dst.center) - dst.radius) < 1e-10
        # exterior of src goes into the interior of dst
        outside = src.center + 1.5 * src.radius * src.center / abs(src.center)
        assert dst.contains(apply(f, outside))


def test_octagon_relator(octagon):
    a1, b1, a2, b2 = octagon.generators
    rel = compose(commutator(inverse(a1), b1), commutator(inverse(a2), b2))
    assert rel.isclose(MoebiusMap.identity(), 1e-9)


def test_octagon_generators_preserve_disk(octagon):
    rng = np.random.default_rng(0)
    for f in octagon.generators:
        for _ in range(20):
            z = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            assert abs(abs(apply(f, z)) - 1) < 1e-12


def test_rotation_fixing_pm_i():
    assert rotation_fixing_pm_i(0).isclose(MoebiusMap.identity(), 1e-15)
    m = rotation_fixing_pm_i(0.5)
    assert abs(apply(m, 1j) - 1j) < 1e-14
    assert abs(apply(m, -1j) + 1j) < 1e-14
    assert apply(rotation_fixing_pm_i(0.1), 0).real < 0
    # a sphere rotation by theta moves 0 to -tan(theta/2)
    assert abs(apply(rotation_fixing_pm_i(0.1), 0) + math.tan(0.05)) < 1e-12


def test_bend(octagon):
    assert bend(octagon, 0) is octagon
    b = bend(octagon, 0.5)
    m = rotation_fixing_pm_i(0.5)
    for (s0, d0), (s1, d1) in zip(octagon.pairing[:2], b.pairing[:2]):
        for c0, c1 in ((s0, s1), (d0, d1)):
            z = apply(m, c0.center + c0.radius)
            assert abs(abs(z - c1.center) - c1.radius) < 1e-12
    assert b.pairing[2:] == octagon.pairing[2:]
    tr = compose(b.generators[0], b.generators[2]).trace
    assert abs(tr.imag) > 1e-3
    assert abs(compose(octagon.generators[0], octagon.generators[2]).trace.imag) < 1e-12
    with pytest.raises(ValueError, match="bending angle outside validated range"):
        bend(octagon, 0.9)


def test_bend_keeps_relator(octagon):
    a1, b1, a2, b2 = bend(octagon, 0.5).generators
    rel = compose(commutator(inverse(a1), b1), commutator(inverse(a2), b2))
    assert rel.isclose(MoebiusMap.identity(), 1e-9)


def test_schottky_construction(schottky):
    assert schottky.schottky_flag
    assert verify_ping_pong(schottky)
    with pytest.raises(ValueError, match="not a Schottky configuration"):
        build_symmetric_schottky(2, 2.0)


def test_k1_translation_length():
    g = build_symmetric_schottky(1, 1.0)
    (src, dst), = g.pairing
    c = abs(src.center)
    rho = src.radius
    assert abs(complex_length(g.generators[0]).l - 2 * math.acosh(c / rho)) < 1e-12


def test_words_in_schottky_are_loxodromic(schottky):
    for cls in primitive_classes(2, 4):
        assert classify(word_matrix(cls.canonical, schottky)) == "loxodromic"


def test_word_matrix(schottky):
    assert word_matrix((), schottky).isclose(MoebiusMap.identity())
    with pytest.raises(ValueError):
        word_matrix((1, -1), schottky)
    for w in list(enumerate_words(2, 3))[:30]:
        if w[0] == -w[-1]:
            continue
        m = word_matrix(w, schottky)
        assert word_matrix(w + w, schottky).isclose(compose(m, m), 1e-9 * max(1, abs(m.a) ** 2))


def test_length_invariant_under_rotation_and_conjugation(schottky):
    rng = np.random.default_rng(1)
    for cls in primitive_classes(2, 5)[::3]:
        w = cls.canonical
        l0 = complex_length(word_matrix(w, schottky)).l
        for _ in range(10):
            r = int(rng.integers(len(w)))
            v = w[r:] + w[:r]
            if rng.random() < 0.5:
                v = invert(v)
            assert canonical_form(v) == w
            assert abs(complex_length(word_matrix(v, schottky)).l - l0) < 1e-9


def test_json_roundtrip(schottky, octagon, bent):
    for g in (schottky, octagon, bent):
        doc = json.loads(json.dumps(group_to_json(g)))
        h = group_from_json(doc)
        assert group_hash(h) == group_hash(g)
        for f0, f1 in zip(g.generators, h.generators):
            assert f0.isclose(f1, 1e-15)
    assert group_from_json({"type": "schottky", "k": 2, "angle_gap": 1.0}).schottky_flag
    with pytest.raises(ValueError):
        group_from_json({"type": "torus"})
