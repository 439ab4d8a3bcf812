import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalweyl.groups import build_symmetric_schottky
from fractalweyl.limitset import (PointCloud, box_dimension, hausdorff_distance, poincare_abscissa, render_svg,
                                  sample_limit_set)


def cantor_points(level=14):
    x = np.zeros(1)
    for _ in range(level):
        x = np.concatenate([x / 3, x / 3 + 2 / 3])
    return PointCloud(x.astype(complex))


def circle_points(n=10_000, seed=0):
    t = np.random.default_rng(seed).uniform(0, 2 * math.pi, n)
    return PointCloud(np.exp(1j * t))


def test_cyclic_group_two_points():
    g = build_symmetric_schottky(1, 1.0)
    for L in (2, 5, 8):
        assert len(sample_limit_set(g, L)) == 2


def test_sample_requires_length():
    with pytest.raises(ValueError):
        sample_limit_set(build_symmetric_schottky(2, 1.0), 1)


def test_octagon_limit_set_is_circle(octagon):
    cloud = sample_limit_set(octagon, 6)
    assert np.abs(np.abs(cloud.points) - 1).max() < 1e-3
    assert cloud.meta["skipped_non_loxodromic"] >= 0


def test_bent_limit_set_is_not_a_circle(bent):
    p = sample_limit_set(bent, 6).points
    # least-squares circle; a quasicircle misses it by far more than 1e-2
    A = np.c_[p.real, p.imag, np.ones(len(p))]
    sol = np.linalg.lstsq(A, -(np.abs(p) ** 2), rcond=None)[0]
    c = -(sol[0] + 1j * sol[1]) / 2
    r = math.sqrt(abs(c) ** 2 - sol[2])
    assert np.abs(np.abs(p - c) - r).max() > 1e-2
    assert np.abs(np.abs(p) - 1).max() > 1e-2


def test_schottky_points_in_disks(schottky):
    p = sample_limit_set(schottky, 6).points
    inside = np.zeros(len(p), bool)
    for c in schottky.circles:
        inside |= np.abs(p - c.center) <= c.radius * (1 + 1e-9)
    assert inside.all()


def test_box_dimension_circle():
    est = box_dimension(circle_points())
    assert abs(est.value - 1.0) < 0.05
    assert est.stderr >= 0
    assert len(est.scales_used) == len(est.counts) >= 3


def test_box_dimension_cantor():
    est = box_dimension(cantor_points())
    assert abs(est.value - math.log(2) / math.log(3)) < 0.05


def test_box_dimension_octagon(octagon_cloud7):
    assert abs(box_dimension(octagon_cloud7).value - 1.0) < 0.05


def test_box_dimension_errors():
    with pytest.raises(ValueError, match="at least 100"):
        box_dimension(PointCloud(np.zeros(10, complex)))
    with pytest.raises(ValueError, match="insufficient scale range"):
        box_dimension(circle_points(200), 1e-4, 2e-4, 3)
    with pytest.raises(ValueError):
        box_dimension(circle_points(), 0.1, 0.01)


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_box_dimension_rotation_invariant(phi):
    cloud = cantor_points(12)
    base = box_dimension(cloud)
    rot = box_dimension(PointCloud(cloud.points * np.exp(1j * phi)))
    assert abs(rot.value - base.value) <= max(3 * (base.stderr + rot.stderr), 0.05)


def test_sampling_converges(schottky):
    clouds = [sample_limit_set(schottky, L).points for L in (6, 7, 8)]
    d67 = hausdorff_distance(clouds[0], clouds[1])
    d78 = hausdorff_distance(clouds[1], clouds[2])
    assert d67 < 0.05 and d78 < 0.05
    assert d78 < d67


def test_hausdorff_distance_basic():
    a = np.array([0, 1], complex)
    b = np.array([0, 1, 1 + 0.5j], complex)
    assert hausdorff_distance(a, a) == 0
    assert abs(hausdorff_distance(a, b) - 0.5) < 1e-15


def test_poincare_cyclic_group():
    # orbit growth is linear in T, so the fitted rate decays like 1/T
    g = build_symmetric_schottky(1, 1.0)
    assert poincare_abscissa(g, 40) <= 0.05


def test_poincare_schottky(schottky):
    est = poincare_abscissa(schottky, 10)
    assert 0 < est < 1


def test_poincare_rejects_fuchsian(octagon):
    with pytest.raises(ValueError, match="orbital counting requires free ping-pong group"):
        poincare_abscissa(octagon, 6)


def test_cloud_csv_roundtrip(tmp_path, schottky):
    cloud = sample_limit_set(schottky, 4)
    cloud.to_csv(tmp_path / "p.csv")
    back = PointCloud.from_csv(tmp_path / "p.csv")
    assert np.array_equal(back.points, cloud.points)


def test_render_svg(tmp_path, octagon_cloud7):
    path = tmp_path / "limit.svg"
    render_svg(octagon_cloud7, path, title="octagon")
    text = path.read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert "</svg>" in text
    assert path.stat().st_size < 2_000_000
