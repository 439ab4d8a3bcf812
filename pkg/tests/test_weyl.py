import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalweyl.weyl import (CountRow, CountTable, check_bound, count_along_axis, count_zero_list, fit_exponent,
                              planted_zeros, plot_counts, square)
from fractalweyl.zeta import ZetaParams, delta_from_zeta

# recorded regression table: symmetric k=2 group, gap 1.0, L=10, R=2
SCHOTTKY_T = np.linspace(4, 40, 10)
SCHOTTKY_COUNTS = [23, 22, 22, 21, 23, 22, 22, 22, 23, 22]


def lattice_count(t, R, k_max):
    """Zeros -k + i m of the cylinder product strictly inside the square."""
    ks = [k for k in range(k_max + 1) if k < R]
    ms = [m for m in range(math.floor(t - R), math.ceil(t + R) + 1) if abs(m - t) < R]
    return len(ks) * len(ms)


@pytest.fixture(scope="module")
def schottky_table(spec10):
    p = ZetaParams.for_region(square(0, 2.0), 10)
    return count_along_axis(spec10, p, 2.0, SCHOTTKY_T, threads=2, group="schottky")


def test_cylinder_small_squares(cylinder_spec):
    t = np.arange(5, 51, 5)
    tab = count_along_axis(cylinder_spec, ZetaParams(3), 0.4, t)
    assert (tab.counts <= 1).all()
    assert len(set(tab.counts.tolist())) == 1


def test_cylinder_constant_counts(cylinder_spec):
    t = np.arange(5, 51, 5)
    p = ZetaParams.for_region(square(0, 1.6))
    tab = count_along_axis(cylinder_spec, p, 1.6, t)
    assert tab.counts.tolist() == [lattice_count(x, 1.6, p.k_max) for x in t]
    assert set(tab.counts.tolist()) == {6}


def test_schottky_regression(schottky_table):
    assert schottky_table.counts.tolist() == SCHOTTKY_COUNTS


def test_schottky_bound(schottky_table, spec10):
    delta = delta_from_zeta(spec10, ZetaParams(3, 10)).value
    rep = check_bound(schottky_table, delta + 0.15)
    assert rep.passed and rep.stable


def test_fit_cylinder(cylinder_spec):
    tab = count_along_axis(cylinder_spec, ZetaParams(5), 1.6, np.arange(5, 101, 5))
    fit = fit_exponent(tab)
    assert abs(fit.exponent) < 0.05
    assert "bounded counts" in fit.flags


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5, 0.7, 1.0])
def test_planted_exponent(alpha):
    t = np.geomspace(5, 1000, 20)
    fit = fit_exponent(count_zero_list(planted_zeros(alpha, 1100), 1.0, t))
    assert abs(fit.exponent - alpha) < 0.1


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1))
def test_bound_consistent_with_fit(alpha):
    t = np.geomspace(5, 1000, 20)
    tab = count_zero_list(planted_zeros(alpha, 1100), 1.0, t)
    fit = fit_exponent(tab)
    assert check_bound(tab, fit.exponent + 2 * fit.residual).passed


def test_all_zero_counts():
    tab = CountTable([CountRow(float(t), 1.0, 0) for t in range(1, 8)])
    fit = fit_exponent(tab)
    assert fit.exponent == 0
    assert "insufficient data" in fit.flags


def test_fit_flags_few_rows():
    tab = CountTable([CountRow(1.0, 1.0, 1), CountRow(2.0, 1.0, 2), CountRow(3.0, 1.0, 4)])
    assert "fewer than 5 positive rows" in fit_exponent(tab).flags


def test_bound_cylinder(cylinder_spec):
    p = ZetaParams.for_region(square(0, 1.6))
    short = count_along_axis(cylinder_spec, p, 1.6, np.arange(5, 51, 5))
    long = count_along_axis(cylinder_spec, p, 1.6, np.arange(5, 101, 5))
    a, b = check_bound(short, 0.0), check_bound(long, 0.0)
    assert a.passed and b.passed
    assert abs(b.C / a.C - 1) < 0.05
    neg_short, neg_long = check_bound(short, -0.5), check_bound(long, -0.5)
    assert neg_long.C > neg_short.C
    assert not neg_long.stable


def test_bound_budget():
    tab = CountTable([CountRow(float(t), 1.0, 3) for t in range(1, 10)])
    assert check_bound(tab, 0.0, budget=3.0).passed
    assert not check_bound(tab, 0.0, budget=2.9).passed


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.1, 2.0), st.floats(0, 0.8))
def test_counts_monotone_in_R(r1, r2, alpha):
    lo, hi = sorted((r1, r2))
    zs = planted_zeros(alpha, 60)
    t = np.linspace(5, 50, 10)
    a = count_zero_list(zs, lo, t).counts
    b = count_zero_list(zs, hi, t).counts
    assert (a <= b).all()


def test_table_validation():
    with pytest.raises(ValueError):
        CountTable([CountRow(2.0, 1.0, 1), CountRow(1.0, 1.0, 1)])
    with pytest.raises(ValueError):
        CountTable([CountRow(1.0, 1.0, -1)])
    with pytest.raises(ValueError):
        count_along_axis(None, ZetaParams(3), 0.0, [1.0])


def test_csv_roundtrip_and_plot(tmp_path):
    tab = count_zero_list(planted_zeros(0.5, 200), 1.0, np.geomspace(5, 150, 12))
    tab.to_csv(tmp_path / "c.csv")
    back = CountTable.from_csv(tmp_path / "c.csv")
    assert back.counts.tolist() == tab.counts.tolist()
    assert np.array_equal(back.t, tab.t)
    fit = fit_exponent(tab)
    plot_counts(tab, fit, check_bound(tab, fit.exponent), tmp_path / "w.svg")
    assert "</svg>" in (tmp_path / "w.svg").read_text()
