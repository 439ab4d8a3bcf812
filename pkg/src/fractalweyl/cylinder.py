"""Phase-space dynamics of the hyperbolic cylinder in compactified coordinates.

Coordinates are ``(r, y, zeta, eta)`` with ``r`` in (-1, 1) inside the
manifold and ``mu = 1 - r^2``; the symbol is
``p = mu zeta^2 + 2 r zeta + eta^2 - 1``. Stacks of states are arrays of
shape ``(..., 4)`` in that column order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .svg import Canvas
from .zeta import Region, Zero, ZeroList, ZetaParams

R_, Y_, Z_, E_ = range(4)


@dataclass(frozen=True)
class PhasePoint:
    r: float
    y: float
    zeta: float
    eta: float

    @property
    def mu(self) -> float:
        return 1.0 - self.r * self.r

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.y, self.zeta, self.eta], dtype=float)

    @classmethod
    def from_array(cls, a) -> "PhasePoint":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def _state(pt) -> np.ndarray:
    if isinstance(pt, PhasePoint):
        return pt.as_array()
    return np.asarray(pt, dtype=float)


def symbol_p(pt) -> np.ndarray:
    x = _state(pt)
    r, z, e = x[..., R_], x[..., Z_], x[..., E_]
    return (1 - r * r) * z * z + 2 * r * z + e * e - 1


def hamiltonian_field(pt) -> np.ndarray:
    """``(dr, dy, dzeta, deta)`` of the Hamiltonian vector field of ``p``."""
    x = _state(pt)
    r, z, e = x[..., R_], x[..., Z_], x[..., E_]
    out = np.empty_like(x)
    out[..., R_] = 2 * ((1 - r * r) * z + r)
    out[..., Y_] = 2 * e
    out[..., Z_] = 2 * z * (r * z - 1)
    out[..., E_] = 0.0
    return out


def on_shell_zeta(r, eta, branch):
    """Root ``zeta`` of ``p = 0`` for given ``r, eta``; ``branch`` is +1 or -1.

    Written in the cancellation-free form, so ``mu = 0`` is allowed.
    Returns NaN where no real root exists.
    """
    r = np.asarray(r, dtype=float)
    eta = np.asarray(eta, dtype=float)
    mu = 1 - r * r
    c = eta * eta - 1
    disc = r * r - mu * c
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(disc)
        # q = -(r + sign(r) sqrt(disc)); roots q / mu and c / q
        sgn = np.where(r >= 0, 1.0, -1.0)
        q = -(r + sgn * sq)
        big = q / mu
        small = np.where(q != 0, c / q, 0.0)
        lo = np.minimum(big, small)
        hi = np.maximum(big, small)
        out = np.where(np.asarray(branch) > 0, hi, lo)
        # mu = 0: only the finite root survives
        out = np.where(mu == 0, small, out)
    return np.where(disc >= 0, out, np.nan)


def _project_to_shell(x: np.ndarray, max_rel: float = 1e-8) -> np.ndarray:
    """Move ``zeta`` to the nearest root of ``p = 0`` (``r, eta`` fixed).

    Only corrections below ``max_rel`` (relative) are applied: larger ones
    mean the step itself is inaccurate, e.g. near a blow-up of zeta, and
    snapping would hide a genuine escape.
    """
    r, z, e = x[..., R_], x[..., Z_], x[..., E_]
    z1 = on_shell_zeta(r, e, 1)
    z2 = on_shell_zeta(r, e, -1)
    pick = np.where(np.abs(z1 - z) <= np.abs(z2 - z), z1, z2)
    ok = np.isfinite(pick) & (np.abs(pick - z) <= max_rel * (1 + np.abs(z)))
    out = x.copy()
    out[..., Z_] = np.where(ok, pick, z)
    return out


def _rk4_step(x: np.ndarray, h: float) -> np.ndarray:
    k1 = hamiltonian_field(x)
    k2 = hamiltonian_field(x + 0.5 * h * k1)
    k3 = hamiltonian_field(x + 0.5 * h * k2)
    k4 = hamiltonian_field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class FlowTrajectory:
    t: np.ndarray
    states: np.ndarray
    energy_drift: float
    escaped: bool
    p0: float

    @property
    def final(self) -> PhasePoint:
        return PhasePoint.from_array(self.states[-1])

    @property
    def samples(self) -> list[tuple[float, PhasePoint]]:
        return [(float(t), PhasePoint.from_array(s)) for t, s in zip(self.t, self.states)]

    def to_csv(self, path) -> None:
        p = symbol_p(self.states)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "r", "y", "zeta", "eta", "p"])
            for t, s, pv in zip(self.t, self.states, p):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in s] + [repr(float(pv))])


ESCAPE_R = 10.0
ESCAPE_ZETA = 1e10


def integrate_many(x0: np.ndarray, T: float, dt: float = 1e-3, escape_r: float = ESCAPE_R,
                   escape_zeta: float = ESCAPE_ZETA, project: bool = False):
    """RK4 for a stack of starts; returns final states, escape flags, drift, steps taken.

    A trajectory stops (its state frozen) at the first step where it leaves
    ``|r| <= escape_r, |zeta| <= escape_zeta``; the drift is measured up to
    that point. ``project=True`` snaps ``zeta`` back onto ``p = 0`` after
    every step, which keeps orbits on unstable invariant curves.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(abs(T) / dt))
    if n >= 10**8:
        raise ValueError("too many steps (|T|/dt >= 1e8)")
    h = math.copysign(dt, T) if T != 0 else dt
    x = np.array(x0, dtype=float, copy=True)
    p0 = symbol_p(x)
    alive = np.ones(x.shape[0], dtype=bool)
    drift = np.zeros(x.shape[0])
    steps = np.zeros(x.shape[0], dtype=int)
    for _ in range(n):
        if not alive.any():
            break
        xa = x[alive]
        with np.errstate(over="ignore", invalid="ignore"):
            xn = _rk4_step(xa, h)
            if project:
                xn = _project_to_shell(xn)
        bad = ~(np.isfinite(xn).all(axis=1) & (np.abs(xn[:, R_]) <= escape_r)
                & (np.abs(xn[:, Z_]) <= escape_zeta))
        idx = np.flatnonzero(alive)
        good_idx = idx[~bad]
        x[good_idx] = xn[~bad]
        steps[good_idx] += 1
        drift[good_idx] = np.maximum(drift[good_idx], np.abs(symbol_p(xn[~bad]) - p0[good_idx]))
        alive[idx[bad]] = False
    return x, ~alive, drift, steps


def integrate_flow(pt, T: float, dt: float = 1e-3, record_every: int = 1) -> FlowTrajectory:
    """Fixed-step RK4 trajectory from ``pt`` over time ``T`` (negative allowed)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(abs(T) / dt))
    if n >= 10**8:
        raise ValueError("too many steps (|T|/dt >= 1e8)")
    h = math.copysign(dt, T) if T != 0 else dt
    x = _state(pt).astype(float).copy()
    p0 = float(symbol_p(x))
    ts, xs = [0.0], [x.copy()]
    drift = 0.0
    escaped = False
    for i in range(1, n + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            xn = _rk4_step(x, h)
        if not (np.all(np.isfinite(xn)) and abs(xn[R_]) <= ESCAPE_R and abs(xn[Z_]) <= ESCAPE_ZETA):
            escaped = True
            if ts[-1] != (i - 1) * h:
                ts.append((i - 1) * h)
                xs.append(x.copy())
            break
        x = xn
        drift = max(drift, abs(float(symbol_p(x)) - p0))
        if i % record_every == 0 or i == n:
            ts.append(i * h)
            xs.append(x.copy())
    return FlowTrajectory(np.array(ts), np.array(xs), drift, escaped, p0)


# --- trapping ---------------------------------------------------------------

TRAPPED = "trapped"
FORWARD_TRAPPED = "forward_trapped"
BACKWARD_TRAPPED = "backward_trapped"
ESCAPING = "escaping"


def classify_trapping(pts, T_max: float = 30.0, dt: float = 1e-3, escape_r: float = 1.5,
                      escape_zeta: float = 1e3, tol: float = 1e-6) -> np.ndarray:
    """Trapping type of energy-surface points by integrating both ways.

    Names follow the convention that the forward trapped set Gamma_+ is
    the set of points whose orbit stays bounded as t -> -infinity (on the
    cylinder, zeta = 0), and Gamma_- those bounded as t -> +infinity. The
    integration is projected onto ``p = 0``: both sets are unstable in the
    direction in which they stay bounded, and without projection rounding
    errors push their orbits off within T_max.
    """
    x = np.atleast_2d(_state(pts)).astype(float)
    if np.any(np.abs(symbol_p(x)) >= tol):
        raise ValueError("classify_trapping needs points on the energy surface |p| < 1e-6")
    _, esc_f, _, _ = integrate_many(x, T_max, dt, escape_r, escape_zeta, project=True)
    _, esc_b, _, _ = integrate_many(x, -T_max, dt, escape_r, escape_zeta, project=True)
    out = np.full(len(x), ESCAPING, dtype=object)
    out[~esc_f & ~esc_b] = TRAPPED
    out[esc_f & ~esc_b] = FORWARD_TRAPPED
    out[~esc_f & esc_b] = BACKWARD_TRAPPED
    return out


def analytic_trapping(pts, tol: float = 1e-9) -> np.ndarray:
    """Membership in K, Gamma_+ = {zeta = 0} and Gamma_- = {zeta = -2r/mu}, with |eta| = 1."""
    x = np.atleast_2d(_state(pts))
    r, z, e = x[:, R_], x[:, Z_], x[:, E_]
    mu = 1 - r * r
    ring = np.abs(np.abs(e) - 1) < tol
    with np.errstate(divide="ignore", invalid="ignore"):
        plus = ring & (np.abs(z) < tol)
        minus = ring & (mu > 0) & (np.abs(mu * z + 2 * r) < tol)
    out = np.full(len(x), ESCAPING, dtype=object)
    out[plus & minus] = TRAPPED
    out[plus & ~minus] = FORWARD_TRAPPED
    out[~plus & minus] = BACKWARD_TRAPPED
    return out


def energy_surface_grid(n_r: int = 50, n_eta: int = 50, r_max: float = 0.8,
                        eta_max: float = 49 / 39) -> np.ndarray:
    """Points of ``p = 0`` over an ``n_r x n_eta`` grid in ``(r, eta)``, both zeta roots.

    The default eta grid contains +-1 exactly, so the analytic trapped
    curves are sampled.
    """
    rs = np.linspace(-r_max, r_max, n_r)
    es = eta_max * np.linspace(-1, 1, n_eta)
    es[np.abs(np.abs(es) - 1) < 1e-12] = np.sign(es[np.abs(np.abs(es) - 1) < 1e-12])
    R, E = np.meshgrid(rs, es, indexing="ij")
    pts = []
    for branch in (1, -1):
        Z = on_shell_zeta(R, E, branch)
        ok = np.isfinite(Z)
        pts.append(np.stack([R[ok], np.zeros(ok.sum()), Z[ok], E[ok]], axis=1))
    pts = np.concatenate(pts)
    # double roots (|eta| = 1 at r = 0) appear once
    _, idx = np.unique(np.round(pts, 12), axis=0, return_index=True)
    return pts[np.sort(idx)]


def separatrix_distance(pts) -> np.ndarray:
    """Distance in (zeta, eta) to the analytic trapped curves."""
    x = np.atleast_2d(_state(pts))
    r, z, e = x[:, R_], x[:, Z_], x[:, E_]
    mu = 1 - r * r
    de = np.abs(np.abs(e) - 1)
    return np.minimum(np.hypot(z, de), np.hypot(z + 2 * r / mu, de))


# --- escape functions ---------------------------------------------------------


def escape_f00(pt) -> tuple[np.ndarray, np.ndarray]:
    """``f00 = r zeta + r^2 / 2`` and its derivative along the flow."""
    x = _state(pt)
    r, z = x[..., R_], x[..., Z_]
    mu = 1 - r * r
    return r * z + 0.5 * r * r, 2 * z * z + 2 * mu * z * r + 2 * r * r


def phi_pm(pt):
    """``(phi_+, phi_-, H_p phi_+, H_p phi_-)`` with phi_+ = zeta^2, phi_- = (mu zeta + 2r)^2."""
    x = _state(pt)
    r, z = x[..., R_], x[..., Z_]
    mu = 1 - r * r
    w = mu * z + 2 * r
    return z * z, w * w, 4 * z * z * (r * z - 1), 4 * w * w * (1 - r * z)


FHAT_C = 4.0


@dataclass
class FhatValue:
    value: np.ndarray
    derivative: np.ndarray
    outside_neighborhood: np.ndarray
    bound_ok: np.ndarray


def fhat(pt, h_over_htilde: float, C: float = FHAT_C) -> FhatValue:
    """Logarithmically flattened escape function and its flow derivative.

    ``H_p fhat = 4 (1 - r zeta) (phi_-/(h + phi_-) + phi_+/(h + phi_+))``. Off the
    neighborhood ``max(phi_+, phi_-) < C^2 h`` one of the fractions is at
    least ``C^2/(1 + C^2)``; where ``r zeta <= 1/2`` the derivative is
    therefore at least ``2 C^2 / (1 + C^2)``, which ``bound_ok`` checks.
    """
    if h_over_htilde <= 0:
        raise ValueError("h_over_htilde must be positive")
    h = h_over_htilde
    pp, pm, dpp, dpm = phi_pm(pt)
    value = np.log(h + pm) - np.log(h + pp)
    deriv = dpm / (h + pm) - dpp / (h + pp)
    outside = np.maximum(pp, pm) >= C * C * h
    x = _state(pt)
    near = x[..., R_] * x[..., Z_] <= 0.5
    threshold = 2 * C * C / (1 + C * C)
    ok = ~(outside & near) | (deriv >= threshold)
    return FhatValue(value, deriv, outside, ok)


# --- radial points --------------------------------------------------------------


@dataclass
class RadialLinearization:
    sign: str
    matrix: np.ndarray
    eigenvalues: list[float]
    eigenvectors: list[list[float]] = field(default_factory=list)


def radial_linearization(sign: str) -> RadialLinearization:
    """Linearized rescaled flow at the radial set in coordinates (mu, rho, eta_hat)."""
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    s = 1.0 if sign == "+" else -1.0
    A = np.array([[4 * s, -4.0, 0.0], [0.0, 2 * s, 0.0], [0.0, 0.0, 2 * s]])
    vecs = [[1.0, 0.0, 0.0], [2.0, s, 0.0], [0.0, 0.0, 1.0]]
    return RadialLinearization(sign, A, [4 * s, 2 * s, 2 * s], vecs)


def rescaled_field(x: np.ndarray, r_branch: float, zeta_sign: float) -> np.ndarray:
    """``rho H_p`` in coordinates ``(mu, rho, eta_hat)`` near fiber infinity.

    ``rho = 1/|zeta|``, ``eta_hat = rho eta``, ``r = r_branch sqrt(1 - mu)``.
    """
    mu, rho, eh = x[..., 0], x[..., 1], x[..., 2]
    r = r_branch * np.sqrt(1 - mu)
    s = zeta_sign
    dr = 2 * (mu * s + r * rho)
    out = np.empty_like(x)
    out[..., 0] = -2 * r * dr
    out[..., 1] = -2 * rho * (r * s - rho)
    out[..., 2] = -2 * eh * (r * s - rho)
    return out


def radial_point(sign: str) -> tuple[float, float]:
    """``(r, sgn zeta)`` of one component of L_+ or L_-: L_+ has r sgn(zeta) = -1."""
    return (1.0, -1.0) if sign == "+" else (1.0, 1.0)


def flow_map_jacobian(sign: str, dt: float = 1e-2, h: float = 1e-6, n_steps: int = 100) -> np.ndarray:
    """Central-difference Jacobian of the rescaled time-``dt`` flow map at L_+/L_-."""
    rb, zs = radial_point(sign)

    def flow(x):
        x = np.array(x, dtype=float)
        k = dt / n_steps
        for _ in range(n_steps):
            k1 = rescaled_field(x, rb, zs)
            k2 = rescaled_field(x + 0.5 * k * k1, rb, zs)
            k3 = rescaled_field(x + 0.5 * k * k2, rb, zs)
            k4 = rescaled_field(x + k * k3, rb, zs)
            x = x + (k / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        return x

    J = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (flow(e) - flow(-e)) / (2 * h)
    return J


def linearization_error(sign: str, dt: float = 1e-2) -> float:
    lin = radial_linearization(sign)
    return float(np.abs(flow_map_jacobian(sign, dt) - expm(dt * lin.matrix)).max())


# --- characteristic set split ---------------------------------------------------

SIGMA_PLUS = "Sigma_plus"
SIGMA_MINUS = "Sigma_minus"
OFF_CHARACTERISTIC = "off_characteristic"


@dataclass(frozen=True)
class SigmaSplit:
    label: str
    ambiguous: bool = False


def sigma_split(pt, eps: float = 0.2, tol: float = 1e-6) -> SigmaSplit:
    """Which component of the characteristic set ``pt`` lies on.

    In ``|mu| < eps`` the sign of ``-r (zeta - r)`` decides; ``mu >= eps`` is
    all Sigma_+. For ``mu <= -eps`` the split is not defined by a local
    rule: the point is assigned by the hyperbola branch ``r (zeta + r/mu) > 0``
    (Sigma_-) where the branches separate in zeta, and flagged ambiguous.
    """
    x = _state(pt)
    r, z = float(x[R_]), float(x[Z_])
    if abs(float(symbol_p(x))) >= tol:
        return SigmaSplit(OFF_CHARACTERISTIC)
    mu = 1 - r * r
    if mu >= eps:
        return SigmaSplit(SIGMA_PLUS)
    if mu > -eps:
        return SigmaSplit(SIGMA_PLUS if -r * (z - r) > 0 else SIGMA_MINUS)
    minus = r * (z + r / mu) > 0
    return SigmaSplit(SIGMA_MINUS if minus else SIGMA_PLUS, ambiguous=True)


def mu_crossings(traj: FlowTrajectory) -> list[int]:
    """Signs of the jumps of ``mu`` at each crossing of ``mu = 0`` (+1 increasing)."""
    mu = 1 - traj.states[:, R_] ** 2
    out = []
    for a, b in zip(mu[:-1], mu[1:]):
        if a > 0 >= b or a < 0 <= b:
            out.append(1 if b > a else -1)
    return out


# --- resonance lattice ---------------------------------------------------------


def exact_zero_lattice(ell: float, region: Region, k_max: Optional[int] = None) -> ZeroList:
    """Zeros ``-k + 2 pi i m / ell`` of the single-geodesic zeta strictly inside ``region``."""
    if ell <= 0:
        raise ValueError("ell must be positive")
    step = 2 * math.pi / ell
    k_lo = max(0, math.ceil(-region.xmax))
    k_hi = math.floor(-region.xmin)
    if k_max is not None:
        k_hi = min(k_hi, k_max)
    zeros = []
    for k in range(k_lo, k_hi + 1):
        for m in range(math.floor(region.ymin / step), math.ceil(region.ymax / step) + 1):
            s = complex(-k, step * m)
            if region.contains(s):
                zeros.append(Zero(s, 1))
    zeros.sort(key=lambda z: (z.s.imag, z.s.real))
    p = ZetaParams(k_max if k_max is not None else max(k_hi, 0))
    return ZeroList(zeros, region, p, {"ell": ell, "source": "lattice"})


# --- pictures ------------------------------------------------------------------


def _compact(z):
    return np.asarray(z) / np.sqrt(1 + np.asarray(z) ** 2)


def phase_portrait(path, trajectories: list[FlowTrajectory] = (), r_span: float = 1.6) -> None:
    """Picture in ``(r, zeta / <zeta>)`` with the trapped curves and radial points."""
    cv = Canvas(-r_span, r_span, -1.1, 1.1, margin=40)
    cv.frame()
    # Sigma_- pieces near the conformal boundary: beyond |r| = 1, past zeta = r
    for sgn in (1, -1):
        rr = np.linspace(1.0, r_span, 30) * sgn
        edge = _compact(rr)
        side = 1.0 if sgn > 0 else -1.0
        cv.polygon(list(rr) + list(rr[::-1]), list(edge) + [side] * len(rr), fill="orange", opacity=0.25)
    for x in (-1.0, 1.0):
        cv.polyline([x, x], [-1.1, 1.1], stroke="gray", width=1, dash="6,6")
    rr = np.linspace(-r_span, r_span, 200)
    cv.polyline(rr, _compact(rr), stroke="gray", width=1, dash="3,5")
    cv.polyline(rr, 0 * rr, stroke="green", width=3)
    rin = np.linspace(-0.999, 0.999, 400)
    cv.polyline(rin, _compact(-2 * rin / (1 - rin**2)), stroke="purple", width=3)
    cv.circle(0.0, 0.0, 8, fill="red")
    for r0, s in ((1.0, -1.0), (-1.0, 1.0)):
        cv.circle(r0, s, 9, fill="blue")
        cv.text(r0 + 0.03, s * 0.95, "L+", 20)
    for r0, s in ((1.0, 1.0), (-1.0, -1.0)):
        cv.circle(r0, s, 9, fill="black")
        cv.text(r0 + 0.03, s * 0.95, "L-", 20)
    for tr in trajectories:
        keep = np.abs(tr.states[:, R_]) <= r_span
        if keep.sum() >= 2:
            cv.polyline(tr.states[keep, R_], _compact(tr.states[keep, Z_]), stroke="black", width=1)
    cv.save(path, "cylinder phase portrait")


# --- property checks ------------------------------------------------------------


def random_on_shell(n: int, seed: int = 0, r_max: float = 0.8) -> np.ndarray:
    """``n`` points of ``p = 0`` with ``|r| <= r_max``, ``|eta| <= 1``, random zeta root."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(-r_max, r_max, n)
    e = rng.uniform(-1, 1, n)
    b = rng.choice([-1, 1], n)
    z = on_shell_zeta(r, e, b)
    return np.stack([r, np.zeros(n), z, e], axis=1)


def identity_checks(n: int = 100_000, seed: int = 0, zeta_max: float = 10.0) -> dict:
    """Algebraic identities of the escape functions and the field at random points.

    Derivatives along the flow are recomputed by the chain rule from
    ``hamiltonian_field`` and compared with the closed forms.
    """
    rng = np.random.default_rng(seed)
    x = np.stack([rng.uniform(-1, 1, n), rng.uniform(-5, 5, n),
                  rng.uniform(-zeta_max, zeta_max, n), rng.uniform(-2, 2, n)], axis=1)
    r, z = x[:, R_], x[:, Z_]
    mu = 1 - r * r
    F = hamiltonian_field(x)
    scale = 1 + z * z

    _, f_der = escape_f00(x)
    f_chain = (z + r) * F[:, R_] + r * F[:, Z_]
    _, _, dpp, dpm = phi_pm(x)
    w = mu * z + 2 * r
    dpp_chain = 2 * z * F[:, Z_]
    dpm_chain = 2 * w * (-2 * r * z * F[:, R_] + mu * F[:, Z_] + 2 * F[:, R_])

    # Hamilton's equations by central differences of p
    m = min(n, 1000)
    h = 1e-6
    grad = np.zeros((m, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        grad[:, j] = (symbol_p(x[:m] + e) - symbol_p(x[:m] - e)) / (2 * h)
    ham = np.stack([grad[:, Z_], grad[:, E_], -grad[:, R_], -grad[:, Y_]], axis=1)

    edge = np.array([[1.0, 0.0, zz, 0.0] for zz in np.linspace(-zeta_max, zeta_max, 101)]
                    + [[-1.0, 0.0, zz, 0.0] for zz in np.linspace(-zeta_max, zeta_max, 101)])
    dmu = -2 * edge[:, R_] * hamiltonian_field(edge)[:, R_]

    def item(err, tol):
        return {"max_error": float(err), "tol": tol, "passed": bool(err <= tol)}

    out = {
        "n_points": n,
        "seed": seed,
        "escape_lower_bound": {"min_excess": float((f_der - (z * z + r * r)).min()),
                               "passed": bool(((f_der - (z * z + r * r)) >= -1e-12 * scale).all())},
        "escape_derivative": item(np.max(np.abs(f_der - f_chain) / scale), 1e-12),
        "phi_plus_derivative": item(np.max(np.abs(dpp - dpp_chain) / scale**2), 1e-12),
        "phi_minus_derivative": item(np.max(np.abs(dpm - dpm_chain) / scale**2), 1e-12),
        "phi_plus_formula": item(np.max(np.abs(dpp - 4 * z * z * (r * z - 1)) / scale**2), 1e-12),
        "eta_conserved": {"max_abs": float(np.abs(F[:, E_]).max()), "passed": bool((F[:, E_] == 0).all())},
        "mu_derivative_at_boundary": item(np.max(np.abs(dmu + 4 * edge[:, R_] ** 2)), 1e-12),
        "hamilton_equations": item(np.max(np.abs(ham - F[:m]) / ((1 + np.abs(x[:m, Z_])) ** 2)[:, None]), 1e-6),
        "f00_value_at_origin": item(abs(float(escape_f00(np.zeros(4))[0])), 0.0),
    }
    out["all_passed"] = all(v["passed"] for v in out.values() if isinstance(v, dict))
    return out


def linearization_report(dt: float = 1e-2) -> dict:
    out = {}
    for sign in ("+", "-"):
        lin = radial_linearization(sign)
        eig = sorted(np.linalg.eigvals(lin.matrix).real.tolist(), reverse=sign == "+")
        err = linearization_error(sign, dt)
        out[sign] = {"matrix": lin.matrix.tolist(), "eigenvalues": eig,
                     "exp_error": err, "passed": bool(err < 1e-4)}
    out["all_passed"] = all(v["passed"] for v in out.values())
    return out


def energy_drift_check(n: int = 100, T: float = 10.0, dt: float = 1e-3, seed: int = 0) -> dict:
    x0 = random_on_shell(n, seed)
    _, escaped, drift, _ = integrate_many(x0, T, dt)
    return {"n_starts": n, "T": T, "dt": dt, "max_drift": float(drift.max()),
            "escaped": int(escaped.sum()), "passed": bool(drift.max() < 1e-8)}


def trapping_agreement(n_r: int = 50, n_eta: int = 50, T_max: float = 30.0, dt: float = 1e-3) -> dict:
    pts = energy_surface_grid(n_r, n_eta)
    num = classify_trapping(pts, T_max, dt)
    ana = analytic_trapping(pts)
    bad = num != ana
    dist = separatrix_distance(pts[bad])
    return {"n_points": int(len(pts)), "agreement": float(1 - bad.mean()),
            "disagreements": int(bad.sum()),
            "max_separatrix_distance_of_disagreement": float(dist.max()) if bad.any() else 0.0,
            "passed": bool(1 - bad.mean() >= 0.99 and (not bad.any() or dist.max() <= 1e-3))}
