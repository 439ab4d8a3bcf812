import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalweyl.cylinder import (BACKWARD_TRAPPED, ESCAPING, FORWARD_TRAPPED, OFF_CHARACTERISTIC, SIGMA_MINUS,
                                  SIGMA_PLUS, TRAPPED, PhasePoint, analytic_trapping, classify_trapping,
                                  energy_drift_check, escape_f00, exact_zero_lattice, fhat, hamiltonian_field,
                                  identity_checks, integrate_flow, linearization_error, linearization_report,
                                  mu_crossings, on_shell_zeta, phase_portrait, phi_pm, radial_linearization,
                                  random_on_shell, sigma_split, symbol_p, trapping_agreement)
from fractalweyl.zeta import Region, ZetaParams, find_zeros, single_geodesic_spectrum


def test_symbol_examples():
    assert symbol_p(PhasePoint(0, 0, 0, 1)) == 0
    assert symbol_p(PhasePoint(0, 0, 0, 0)) == -1
    r = 0.5
    assert abs(symbol_p(PhasePoint(r, 0, -2 * r / (1 - r * r), 1))) < 1e-15


def test_field_examples():
    for e in (1, -1):
        assert np.array_equal(hamiltonian_field(PhasePoint(0, 1.3, 0, e)), [0, 2 * e, 0, 0])
    # on mu = 0 the r-velocity is 2r, so d mu/dt = -2 r dr = -4 r^2
    for r in (1.0, -1.0):
        for z in (-3.0, 0.2, 7.0):
            dr = hamiltonian_field(PhasePoint(r, 0, z, 0.4))[0]
            assert -2 * r * dr == -4 * r * r


def test_field_is_hamiltonian():
    rng = np.random.default_rng(3)
    x = np.stack([rng.uniform(-1.2, 1.2, 1000), rng.uniform(0, 2 * np.pi, 1000),
                  rng.uniform(-3, 3, 1000), rng.uniform(-2, 2, 1000)], axis=1)
    h = 1e-6
    grad = np.zeros_like(x)
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        grad[:, j] = (symbol_p(x + e) - symbol_p(x - e)) / (2 * h)
    expect = np.stack([grad[:, 2], grad[:, 3], -grad[:, 0], -grad[:, 1]], axis=1)
    assert np.abs(hamiltonian_field(x) - expect).max() < 1e-6


def test_on_shell_roots():
    x = random_on_shell(2000, seed=1)
    assert np.abs(symbol_p(x)).max() < 1e-12
    # mu = 0 keeps the finite root
    z = on_shell_zeta(1.0, 0.5, 1)
    assert abs(symbol_p(PhasePoint(1.0, 0, float(z), 0.5))) < 1e-15
    assert np.isnan(on_shell_zeta(0.0, 2.0, 1))


def test_flow_on_trapped_set():
    tr = integrate_flow(PhasePoint(0, 0, 0, 1), 10.0)
    assert np.abs(tr.states[:, 0]).max() < 1e-8
    assert np.abs(tr.states[:, 2]).max() < 1e-8
    assert abs(tr.final.y - 20.0) < 1e-9
    assert not tr.escaped


def test_flow_on_gamma_plus():
    back = integrate_flow(PhasePoint(0.1, 0, 0, 1), -10.0)
    assert abs(back.final.r) < 1e-8
    assert not back.escaped
    fwd = integrate_flow(PhasePoint(0.1, 0, 0, 1), 10.0)
    assert fwd.escaped
    r = fwd.states[:, 0]
    assert np.all(np.diff(r) > 0)
    assert np.all(np.diff(back.t) < 0)


def test_flow_errors():
    with pytest.raises(ValueError):
        integrate_flow(PhasePoint(0, 0, 0, 1), 1.0, dt=0)
    with pytest.raises(ValueError):
        integrate_flow(PhasePoint(0, 0, 0, 1), 1e6, dt=1e-3)


def test_energy_drift():
    rep = energy_drift_check(n=20, T=10.0, dt=1e-3, seed=5)
    assert rep["max_drift"] < 1e-8


def test_eta_conserved():
    tr = integrate_flow(PhasePoint(0.3, 0, 0.7, 0.6), 3.0)
    assert np.all(tr.states[:, 3] == 0.6)


def test_classify_examples():
    r = 0.3
    pts = np.array([[0, 0, 0, 1], [r, 0, 0, 1], [r, 0, -2 * r / (1 - r * r), 1],
                    [0.2, 0, float(on_shell_zeta(0.2, 0.5, 1)), 0.5]])
    got = classify_trapping(pts, T_max=15.0)
    assert list(got) == [TRAPPED, FORWARD_TRAPPED, BACKWARD_TRAPPED, ESCAPING]
    assert list(analytic_trapping(pts)) == list(got)
    with pytest.raises(ValueError):
        classify_trapping(np.array([[0.0, 0, 0, 0.5]]))


def test_trapping_agreement_small_grid():
    rep = trapping_agreement(n_r=11, n_eta=11, T_max=30.0)
    assert rep["agreement"] >= 0.99


def test_f00_examples():
    v, d = escape_f00(PhasePoint(0, 0, 0, 1))
    assert v == 0 and d == 0
    v, d = escape_f00(PhasePoint(0.5, 0, 1, 0))
    assert abs(v - 0.625) < 1e-15
    assert abs(d - 3.25) < 1e-15
    assert d >= 0.25 + 1


def test_phi_examples():
    pp, pm, dpp, dpm = phi_pm(PhasePoint(0.4, 0, 0, 1))
    assert pp == 0 and dpp == 0
    r = 0.4
    pp, pm, dpp, dpm = phi_pm(PhasePoint(r, 0, -2 * r / (1 - r * r), 1))
    assert pm < 1e-30
    rng = np.random.default_rng(0)
    x = np.zeros((1000, 4))
    x[:, 0] = rng.uniform(-0.05, 0.05, 1000)
    x[:, 2] = rng.uniform(-0.05, 0.05, 1000)
    pp, _, dpp, _ = phi_pm(x)
    ratio = dpp / pp
    assert ratio.min() >= -4.4 and ratio.max() <= -3.6


@settings(max_examples=200, deadline=None)
@given(st.floats(-1, 1), st.floats(-50, 50))
def test_phi_signs(r, z):
    pp, pm, dpp, dpm = phi_pm(np.array([r, 0, z, 0.0]))
    if r * z < 1:
        assert np.sign(dpp) == -np.sign(pp * (1 - r * z))
        assert np.sign(dpm) == np.sign(pm * (1 - r * z))


def test_fhat_examples():
    assert fhat(PhasePoint(0, 0, 0, 1), 1e-4).value == 0
    z = 0.1
    f = fhat(PhasePoint(0, 0, z, math.sqrt(1 - z * z)), 1e-4)
    assert f.outside_neighborhood and f.bound_ok
    assert f.derivative >= 2 * 16 / 17
    x = random_on_shell(5000, seed=2)
    f = fhat(x, 1e-3)
    pp, pm, _, _ = phi_pm(x)
    assert np.allclose(f.value, np.log(1e-3 + pm) - np.log(1e-3 + pp))
    assert f.bound_ok.all()
    with pytest.raises(ValueError):
        fhat(x, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, 1.0), st.floats(0, 10), st.floats(0, 10))
def test_fhat_antisymmetric(h, a, b):
    # value is log(h + phi_-) - log(h + phi_+): swapping the two flips the sign
    val = lambda pp, pm: math.log(h + pm) - math.log(h + pp)
    assert val(a, b) == -val(b, a)


def test_identity_checks():
    rep = identity_checks(n=20_000, seed=4)
    assert rep["all_passed"]


def test_radial_linearization():
    plus, minus = radial_linearization("+"), radial_linearization("-")
    assert np.array_equal(plus.matrix, [[4, -4, 0], [0, 2, 0], [0, 0, 2]])
    assert np.array_equal(minus.matrix, [[-4, -4, 0], [0, -2, 0], [0, 0, -2]])
    assert sorted(np.linalg.eigvals(plus.matrix).real) == pytest.approx([2, 2, 4])
    assert sorted(np.linalg.eigvals(minus.matrix).real) == pytest.approx([-4, -2, -2])
    v = np.array([2.0, 1.0, 0.0])
    assert np.array_equal(plus.matrix @ v, 2 * v)
    for lin in (plus, minus):
        for lam, vec in zip(lin.eigenvalues, lin.eigenvectors):
            assert np.allclose(lin.matrix @ np.array(vec), lam * np.array(vec))
    with pytest.raises(ValueError):
        radial_linearization("0")


def test_linearization_consistency():
    for sign in "+-":
        assert linearization_error(sign) < 1e-4
    assert linearization_report()["all_passed"]


def test_sigma_split_examples():
    # past the horizon the quadratic has a large positive root
    r = 1.001
    z_big = float(on_shell_zeta(r, 0.0, 1))
    assert z_big > 900
    assert sigma_split(PhasePoint(r, 0, z_big, 0)).label == SIGMA_MINUS
    r = 0.999
    z_small = float(on_shell_zeta(r, 0.0, 1))
    assert abs(z_small) < 1
    assert sigma_split(PhasePoint(r, 0, z_small, 0)).label == SIGMA_PLUS
    assert sigma_split(PhasePoint(0.99, 0, 3.0, 0)).label == OFF_CHARACTERISTIC


def test_mu_decreases_at_crossings():
    rng = np.random.default_rng(7)
    crossings = []
    for _ in range(30):
        r = rng.uniform(0.8, 0.98) * rng.choice([-1, 1])
        e = rng.uniform(-0.9, 0.9)
        z = float(on_shell_zeta(r, e, 1 if rng.random() < 0.5 else -1))
        tr = integrate_flow(PhasePoint(r, 0, z, e), 3.0, dt=1e-3)
        crossings += mu_crossings(tr)
    assert crossings and all(c == -1 for c in crossings)


def test_lattice_examples():
    z = exact_zero_lattice(2 * math.pi, Region(-0.5, 0.5, 0.5, 5.5))
    assert [w.s for w in z.zeros] == [1j, 2j, 3j, 4j, 5j]
    z = exact_zero_lattice(1.0, Region(-0.5, 0.5, 0.0, 7.0))
    assert [w.s for w in z.zeros] == [2j * math.pi]
    with pytest.raises(ValueError):
        exact_zero_lattice(0.0, Region(-1, 1, -1, 1))


def test_lattice_matches_zero_search():
    rng = np.random.default_rng(11)
    spec = single_geodesic_spectrum(2 * math.pi)
    done = 0
    while done < 20:
        x0, y0 = rng.uniform(-2.5, 0.3), rng.uniform(-8, 8)
        reg = Region(x0, x0 + rng.uniform(0.3, 1.5), y0, y0 + rng.uniform(0.3, 3))
        edges = np.array([reg.xmin, reg.xmax, reg.ymin, reg.ymax])
        if np.abs(edges - np.round(edges)).min() < 1e-3:
            continue
        p = ZetaParams.for_region(reg)
        exact = exact_zero_lattice(2 * math.pi, reg, p.k_max)
        found = find_zeros(reg, spec, p)
        a = sorted((w.s for w in exact.zeros), key=lambda s: (round(s.imag), round(s.real)))
        b = sorted((w.s for w in found.zeros), key=lambda s: (round(s.imag), round(s.real)))
        assert len(a) == len(b)
        assert all(abs(u - v) < 1e-8 for u, v in zip(a, b))
        done += 1


def test_trajectory_outputs(tmp_path):
    tr = integrate_flow(PhasePoint(0.5, 0, 0.2, float(np.sqrt(1 - 0.75 * 0.04 - 0.2))), 2.0, record_every=100)
    tr.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,r,y,zeta,eta,p"
    assert len(lines) == len(tr.t) + 1
    phase_portrait(tmp_path / "p.svg", [tr])
    assert "</svg>" in (tmp_path / "p.svg").read_text()
