"""Command-line front end.

Every run is described by one JSON config (``--config``) merged over the
command defaults; flags override individual fields. Outputs are staged in a
temporary directory and moved into ``--out`` only when the run succeeds,
together with ``manifest.json`` (command, resolved parameters, group hash,
version, wall time and sha256 of every output).

Exit codes: 0 success, 2 config error, 3 numerical failure. Failures print
a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import math
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from . import cylinder as cyl
from .groups import BEND_BOUND, GeneratorSystem, group_from_json, group_hash
from .limitset import box_dimension, poincare_abscissa, render_svg, sample_limit_set
from .weyl import (CountTable, check_bound, count_along_axis, count_zero_list, default_t_grid,
                   fit_exponent, plot_counts, planted_zeros, square)
from .zeta import (LengthSpectrum, Region, ZetaError, ZetaParams, cached_length_spectrum, count_zeros,
                   delta_from_zeta, find_zeros, single_geodesic_spectrum)

log = logging.getLogger("fractalweyl")

CACHE_ENV = "FRACTALWEYL_CACHE"
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CYLINDER = {"type": "cylinder", "ell": 2 * math.pi}
SCHOTTKY = {"type": "schottky", "k": 2, "angle_gap": 1.0}

DEFAULTS: dict[str, dict] = {
    "limitset": {"group": {"type": "octagon"}, "L": 6, "mode": "fixed_points"},
    "dimension": {"group": {"type": "octagon"}, "L": 7, "eps_min": 1e-3, "eps_max": 1e-1,
                  "n_scales": 12, "poincare_L": 12},
    "delta": {"group": SCHOTTKY, "L": 10, "k_max": 3},
    "zeros": {"group": CYLINDER, "region": [-0.5, 0.5, 0.5, 5.5], "k_max": None, "L": 10},
    "count": {"group": CYLINDER, "region": [-0.5, 0.5, 0.5, 5.5], "k_max": None, "L": 10},
    "weyl": {"group": CYLINDER, "R": 1.6, "t": {"min": 5.0, "max": 100.0, "n": 96, "spacing": "linear"},
             "k_max": None, "L": 10, "nu": None, "budget": None, "planted": None, "zeros_csv": None},
    "cylinder-flow": {"starts": None, "n_random": 8, "seed": 0, "T": 10.0, "dt": 1e-3, "record_every": 10},
    "cylinder-check": {"checks": ["identities", "linearization"], "n_points": 100_000, "seed": 0,
                       "grid": [50, 50], "T_max": 30.0, "dt": 1e-3, "linearization_dt": 1e-2},
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# --- config handling ------------------------------------------------------------


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}{k}"
        if k not in base:
            raise ConfigError(where, "unknown field")
        if isinstance(base[k], dict) and isinstance(v, dict) and k != "group":
            out[k] = _merge(base[k], v, where + ".")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _set_path(cfg: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def _number(cfg: dict, key: str, *, integer: bool = False, positive: bool = False,
            minimum: Optional[float] = None, allow_none: bool = False, path: str = ""):
    v = cfg.get(key)
    where = path + key
    if v is None:
        if allow_none:
            return None
        raise ConfigError(where, "required")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(where, f"expected a number, got {type(v).__name__}")
    if integer and (not float(v).is_integer()):
        raise ConfigError(where, "expected an integer")
    if not math.isfinite(v):
        raise ConfigError(where, "must be finite")
    if positive and v <= 0:
        raise ConfigError(where, "must be positive")
    if minimum is not None and v < minimum:
        raise ConfigError(where, f"must be >= {minimum:g}")
    return int(v) if integer else float(v)


def _region(cfg: dict) -> Region:
    v = cfg.get("region")
    if not isinstance(v, list) or len(v) != 4:
        raise ConfigError("region", "expected [xmin, xmax, ymin, ymax]")
    vals = []
    for i, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigError(f"region[{i}]", "expected a finite number")
        vals.append(float(x))
    if not vals[0] < vals[1]:
        raise ConfigError("region", "xmin must be less than xmax")
    if not vals[2] < vals[3]:
        raise ConfigError("region", "ymin must be less than ymax")
    return Region(*vals)


def _group(cfg: dict, *, allow_cylinder: bool = False) -> tuple[str, Any]:
    """``("cylinder", ell)`` or ``("group", GeneratorSystem)``."""
    doc = cfg.get("group")
    if not isinstance(doc, dict):
        raise ConfigError("group", "expected an object")
    t = doc.get("type")
    if t == "cylinder":
        if not allow_cylinder:
            raise ConfigError("group.type", "cylinder is only valid for zeta commands")
        return "cylinder", _number(doc, "ell", positive=True, path="group.")
    if t not in ("schottky", "octagon", "bent"):
        raise ConfigError("group.type", f"unknown group type {t!r}")
    if t == "schottky" and "generators" not in doc:
        _number(doc, "k", integer=True, minimum=1, path="group.")
        _number(doc, "angle_gap", positive=True, path="group.")
    if t == "bent":
        th = _number(doc, "theta", path="group.")
        if abs(th) >= BEND_BOUND:
            raise ConfigError("group.theta", f"|theta| must be < {BEND_BOUND}")
    try:
        return "group", group_from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("group", str(exc)) from exc


def _source_hash(kind: str, obj) -> str:
    if kind == "cylinder":
        blob = json.dumps({"type": "cylinder", "ell": obj}, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
    return group_hash(obj)


def _spectrum(cfg: dict, region: Optional[Region] = None) -> tuple[LengthSpectrum, ZetaParams, str]:
    kind, obj = _group(cfg, allow_cylinder=True)
    k_max = _number(cfg, "k_max", integer=True, minimum=0, allow_none=True)
    if kind == "cylinder":
        spec = single_geodesic_spectrum(obj)
        if k_max is None:
            k_max = ZetaParams.for_region(region).k_max if region is not None else 3
        return spec, ZetaParams(k_max), _source_hash(kind, obj)
    g: GeneratorSystem = obj
    if not g.schottky_flag:
        raise ConfigError("group.type", "zeta commands need a Schottky group")
    L = _number(cfg, "L", integer=True, minimum=1)
    spec = cached_length_spectrum(g, L, os.environ.get(CACHE_ENV) or None)
    return spec, ZetaParams(3 if k_max is None else k_max, L), group_hash(g)


# --- output staging ---------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Staging:
    """Collects outputs in a temporary directory next to the destination."""

    def __init__(self, out_dir):
        self.out = Path(out_dir)
        self.out.parent.mkdir(parents=True, exist_ok=True)
        self.dir = Path(tempfile.mkdtemp(prefix=".fractalweyl-", dir=self.out.parent))

    def path(self, name: str) -> Path:
        return self.dir / name

    def json(self, name: str, obj) -> None:
        dump_json(obj, self.path(name))

    def digests(self) -> dict[str, str]:
        return {p.name: sha256_file(p) for p in sorted(self.dir.iterdir())}

    def commit(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        for p in sorted(self.dir.iterdir()):
            os.replace(p, self.out / p.name)
        self.discard()

    def discard(self) -> None:
        shutil.rmtree(self.dir, ignore_errors=True)


# --- commands ------------------------------------------------------------------------


def cmd_limitset(cfg: dict, st: Staging, threads: int) -> str:
    _, g = _group(cfg)
    L = _number(cfg, "L", integer=True, minimum=2)
    mode = cfg.get("mode")
    if mode not in ("fixed_points", "orbit"):
        raise ConfigError("mode", "expected 'fixed_points' or 'orbit'")
    cloud = sample_limit_set(g, L, mode)
    cloud.to_csv(st.path("points.csv"))
    theta = g.params.get("theta", 0.0)
    render_svg(cloud, st.path("limitset.svg"), f"limit set, {g.kind}, theta={theta:g}, L={L}")
    st.json("summary.json", {"n_points": len(cloud), "meta": cloud.meta})
    return group_hash(g)


def cmd_dimension(cfg: dict, st: Staging, threads: int) -> str:
    _, g = _group(cfg)
    L = _number(cfg, "L", integer=True, minimum=2)
    eps_min = _number(cfg, "eps_min", positive=True)
    eps_max = _number(cfg, "eps_max", positive=True)
    if not eps_min < eps_max:
        raise ConfigError("eps_min", "must be less than eps_max")
    n_scales = _number(cfg, "n_scales", integer=True, minimum=3)
    cloud = sample_limit_set(g, L)
    est = box_dimension(cloud, eps_min, eps_max, n_scales)
    doc = {"box_dimension": est.to_json(), "n_points": len(cloud), "meta": cloud.meta}
    if g.schottky_flag:
        pL = _number(cfg, "poincare_L", integer=True, minimum=4)
        doc["poincare_abscissa"] = {"value": poincare_abscissa(g, pL), "L": pL}
    st.json("dimension.json", doc)
    return group_hash(g)


def cmd_delta(cfg: dict, st: Staging, threads: int) -> str:
    kind, obj = _group(cfg)
    if not obj.schottky_flag:
        raise ConfigError("group.type", "delta needs a Schottky group")
    spec, p, h = _spectrum(cfg)
    est = delta_from_zeta(spec, p)
    st.json("delta.json", {"delta": est.value, "sensitivity": est.sensitivity,
                           "word_length_L": est.word_length_L, "k_max": p.k_max, "group_hash": h})
    return h


def cmd_zeros(cfg: dict, st: Staging, threads: int) -> str:
    region = _region(cfg)
    spec, p, h = _spectrum(cfg, region)
    zl = find_zeros(region, spec, p)
    zl.to_csv(st.path("zeros.csv"))
    doc = zl.to_json()
    doc["group_hash"] = h
    if cfg["group"].get("type") == "cylinder":
        lat = cyl.exact_zero_lattice(cfg["group"]["ell"], region, p.k_max)
        a = sorted((z.s for z in zl.zeros for _ in range(z.multiplicity)), key=lambda s: (s.imag, s.real))
        b = [z.s for z in lat.zeros]
        doc["lattice_oracle"] = {
            "count": len(b),
            "max_error": max((abs(u - v) for u, v in zip(a, b)), default=0.0) if len(a) == len(b) else None,
        }
    st.json("zeros.json", doc)
    return h


def cmd_count(cfg: dict, st: Staging, threads: int) -> str:
    region = _region(cfg)
    spec, p, h = _spectrum(cfg, region)
    n = count_zeros(region, spec, p)
    st.json("count.json", {"region": region.as_list(), "count": n, "k_max": p.k_max,
                           "word_length_L": p.word_length_L, "group_hash": h})
    return h


def _t_grid(cfg: dict, spec=None, p=None, R=None) -> list[float]:
    t = cfg.get("t")
    if isinstance(t, list):
        if len(t) == 0:
            raise ConfigError("t", "empty t grid")
        vals = [_number({"v": v}, "v", path=f"t[{i}]") for i, v in enumerate(t)]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("t", "must be strictly increasing")
        return vals
    if t == "auto":
        if spec is None:
            raise ConfigError("t", "'auto' needs a zeta source")
        return default_t_grid(spec, p, R)
    if isinstance(t, dict):
        lo = _number(t, "min", path="t.")
        hi = _number(t, "max", path="t.")
        n = _number(t, "n", integer=True, minimum=1, path="t.")
        if not lo < hi:
            raise ConfigError("t.min", "must be less than t.max")
        if t.get("spacing", "geometric") == "linear":
            return [float(v) for v in np.linspace(lo, hi, n)]
        if lo <= 0:
            raise ConfigError("t.min", "geometric grid needs t.min > 0")
        return [float(v) for v in np.geomspace(lo, hi, n)]
    raise ConfigError("t", "expected a list, {min, max, n} or 'auto'")


def _read_zero_csv(path) -> tuple[np.ndarray, np.ndarray]:
    import csv

    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        z = np.array([complex(float(r["re"]), float(r["im"])) for r in rows], dtype=complex)
        m = np.array([int(r.get("mult", 1)) for r in rows], dtype=int)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError("zeros_csv", f"cannot read zero list: {exc}") from exc
    return z, m


def cmd_weyl(cfg: dict, st: Staging, threads: int) -> str:
    R = _number(cfg, "R", positive=True)
    nu = _number(cfg, "nu", allow_none=True)
    budget = _number(cfg, "budget", positive=True, allow_none=True)
    if cfg.get("planted") is not None:
        pl = cfg["planted"]
        if not isinstance(pl, dict):
            raise ConfigError("planted", "expected an object")
        alpha = _number(pl, "alpha", minimum=0, path="planted.")
        density = _number(pl, "density", positive=True, path="planted.") if "density" in pl else 4.0
        t_values = _t_grid(cfg)
        z = planted_zeros(alpha, max(t_values) + R + 1, density)
        table = count_zero_list(z, R, t_values, group=f"planted alpha={alpha:g}")
        h = hashlib.sha256(json.dumps(pl, sort_keys=True).encode()).hexdigest()[:16]
    elif cfg.get("zeros_csv") is not None:
        z, m = _read_zero_csv(cfg["zeros_csv"])
        table = count_zero_list(z, R, _t_grid(cfg), m, group=str(cfg["zeros_csv"]))
        h = sha256_file(cfg["zeros_csv"])[:16]
    else:
        lo_region = square(0.0, R)
        spec, p, h = _spectrum(cfg, lo_region)
        t_values = _t_grid(cfg, spec, p, R)
        table = count_along_axis(spec, p, R, t_values, threads=threads, group=cfg["group"].get("type", ""))
    fit = fit_exponent(table)
    report = check_bound(table, fit.exponent if nu is None else nu, budget)
    table.to_csv(st.path("counts.csv"))
    st.json("fit.json", fit.to_json())
    st.json("bound.json", report.to_json())
    plot_counts(table, fit, report, st.path("weyl.svg"))
    return h


def cmd_cylinder_flow(cfg: dict, st: Staging, threads: int) -> str:
    T = _number(cfg, "T")
    dt = _number(cfg, "dt", positive=True)
    every = _number(cfg, "record_every", integer=True, minimum=1)
    if abs(T) / dt >= 1e8:
        raise ConfigError("dt", "|T|/dt must be below 1e8")
    starts = cfg.get("starts")
    if starts is None:
        n = _number(cfg, "n_random", integer=True, minimum=1)
        x0 = cyl.random_on_shell(n, _number(cfg, "seed", integer=True, minimum=0))
    else:
        if not isinstance(starts, list) or not starts:
            raise ConfigError("starts", "expected a nonempty list of [r, y, zeta, eta]")
        for i, s in enumerate(starts):
            if not (isinstance(s, list) and len(s) == 4
                    and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in s)):
                raise ConfigError(f"starts[{i}]", "expected [r, y, zeta, eta]")
        x0 = np.array(starts, dtype=float)
    trajs = []
    summary = []
    for i, x in enumerate(x0):
        tr = cyl.integrate_flow(x, T, dt, every)
        tr.to_csv(st.path(f"trajectory_{i:03d}.csv"))
        trajs.append(tr)
        summary.append({"start": x.tolist(), "energy_drift": tr.energy_drift, "escaped": tr.escaped,
                        "samples": len(tr.t)})
    cyl.phase_portrait(st.path("phase_portrait.svg"), trajs)
    st.json("flow.json", {"T": T, "dt": dt, "trajectories": summary})
    return hashlib.sha256(json.dumps(_clean(x0)).encode()).hexdigest()[:16]


def cmd_cylinder_check(cfg: dict, st: Staging, threads: int) -> str:
    checks = cfg.get("checks")
    known = ("identities", "linearization", "trapping", "energy")
    if not isinstance(checks, list) or not checks:
        raise ConfigError("checks", f"expected a nonempty list from {list(known)}")
    for i, c in enumerate(checks):
        if c not in known:
            raise ConfigError(f"checks[{i}]", f"unknown check {c!r}")
    dt = _number(cfg, "dt", positive=True)
    report: dict[str, Any] = {}
    if "identities" in checks:
        report["identities"] = cyl.identity_checks(_number(cfg, "n_points", integer=True, minimum=1),
                                                   _number(cfg, "seed", integer=True, minimum=0))
    if "linearization" in checks:
        report["linearization"] = cyl.linearization_report(_number(cfg, "linearization_dt", positive=True))
    if "trapping" in checks:
        grid = cfg.get("grid")
        if not (isinstance(grid, list) and len(grid) == 2):
            raise ConfigError("grid", "expected [n_r, n_eta]")
        n_r = _number({"v": grid[0]}, "v", integer=True, minimum=2, path="grid[0]")
        n_e = _number({"v": grid[1]}, "v", integer=True, minimum=2, path="grid[1]")
        report["trapping"] = cyl.trapping_agreement(n_r, n_e, _number(cfg, "T_max", positive=True), dt)
    if "energy" in checks:
        report["energy"] = cyl.energy_drift_check(100, 10.0, dt, _number(cfg, "seed", integer=True, minimum=0))
    passed = [v.get("all_passed", v.get("passed")) for v in report.values()]
    report["all_passed"] = all(bool(x) for x in passed)
    st.json("report.json", report)
    return "cylinder"


COMMANDS: dict[str, Callable[[dict, Staging, int], str]] = {
    "limitset": cmd_limitset,
    "dimension": cmd_dimension,
    "delta": cmd_delta,
    "zeros": cmd_zeros,
    "count": cmd_count,
    "weyl": cmd_weyl,
    "cylinder-flow": cmd_cylinder_flow,
    "cylinder-check": cmd_cylinder_check,
}


# --- driver ----------------------------------------------------------------------------


def resolve_config(command: str, config_path: Optional[str], sets: list[str], named: dict) -> dict:
    over: dict = {}
    if config_path is not None:
        try:
            with open(config_path) as fh:
                over = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {config_path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(over, dict):
            raise ConfigError("config", "top level must be an object")
    for item in sets:
        if "=" not in item:
            raise ConfigError("--set", f"expected KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_path(over, key, value)
    for key, value in named.items():
        if value is not None:
            _set_path(over, key, value)
    return _merge(DEFAULTS[command], over)


def run(command: str, cfg: dict, out_dir, threads: int = 1) -> dict:
    """Execute a resolved config; returns the manifest. Raises on failure with no outputs left."""
    st = Staging(out_dir)
    t0 = time.perf_counter()
    try:
        ghash = COMMANDS[command](cfg, st, threads)
        digests = st.digests()
        manifest = {"command": command, "params": cfg, "group_hash": ghash, "version": __version__,
                    "threads": threads, "wall_time": round(time.perf_counter() - t0, 3), "outputs": digests}
        st.json("manifest.json", manifest)
        st.commit()
    except BaseException:
        st.discard()
        raise
    return manifest


def _fail(code: int, kind: str, exc: BaseException, **extra) -> int:
    doc = {"error": kind, "type": type(exc).__name__, "message": str(exc), **extra}
    print(json.dumps(_clean(doc), sort_keys=True), file=sys.stderr)
    return code


def _parse_region(s: str) -> list[float]:
    try:
        v = [float(x) for x in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("region must be four comma-separated numbers")
    if len(v) != 4:
        raise argparse.ArgumentTypeError("region must be four comma-separated numbers")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fractalweyl", description="Resonance counting experiments.")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for zero counting")
    ap.add_argument("--log-level", default="WARNING")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", default=None, help="output directory (default: out/<command>)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field; VALUE is parsed as JSON")
        if name in ("limitset", "dimension", "delta", "zeros", "count", "weyl"):
            sp.add_argument("--L", type=int, dest="L")
        if name in ("limitset", "dimension"):
            sp.add_argument("--theta", type=float, help="bend the octagon group by theta")
        if name in ("delta", "zeros", "count", "weyl"):
            sp.add_argument("--k-max", type=int, dest="k_max")
        if name in ("zeros", "count"):
            sp.add_argument("--region", type=_parse_region, metavar="XMIN,XMAX,YMIN,YMAX")
        if name == "weyl":
            sp.add_argument("--R", type=float, dest="R")
            sp.add_argument("--nu", type=float)
        if name in ("cylinder-flow", "cylinder-check"):
            sp.add_argument("--dt", type=float)
        if name == "cylinder-flow":
            sp.add_argument("--T", type=float, dest="T")
        if name == "cylinder-check":
            sp.add_argument("--check", action="append", dest="checks",
                            choices=["identities", "linearization", "trapping", "energy"])
    rr = sub.add_parser("manifest-rerun", help="re-run a manifest and compare output digests")
    rr.add_argument("manifest")
    rr.add_argument("--out", required=True)
    return ap


def _named(args) -> dict:
    named = {}
    for key in ("L", "k_max", "region", "R", "nu", "dt", "T", "checks"):
        if getattr(args, key, None) is not None:
            named[key] = getattr(args, key)
    theta = getattr(args, "theta", None)
    if theta is not None:
        named["group"] = {"type": "bent", "theta": theta} if theta != 0 else {"type": "octagon"}
    return named


def _rerun(args) -> int:
    try:
        with open(args.manifest) as fh:
            man = json.load(fh)
        command, params = man["command"], man["params"]
        if command not in COMMANDS:
            raise ConfigError("command", f"unknown command {command!r}")
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        return _fail(EXIT_CONFIG, "config", ConfigError("manifest", str(exc)))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc, path=exc.path)
    new = run(command, _merge(DEFAULTS[command], params), args.out, man.get("threads", 1))
    old_d, new_d = man["outputs"], new["outputs"]
    mismatched = sorted(k for k in set(old_d) | set(new_d) if old_d.get(k) != new_d.get(k))
    print(json.dumps({"identical": not mismatched, "mismatched": mismatched}, sort_keys=True))
    return 0 if not mismatched else 1


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        return _fail(EXIT_CONFIG, "config", ConfigError("--threads", "must be >= 1"), path="--threads")
    try:
        if args.command == "manifest-rerun":
            return _rerun(args)
        cfg = resolve_config(args.command, args.config, args.set, _named(args))
        out = args.out or os.path.join("out", args.command)
        manifest = run(args.command, cfg, out, args.threads)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc, path=exc.path)
    except ZetaError as exc:
        cell = getattr(exc, "cell", None) or getattr(exc, "region", None)
        return _fail(EXIT_NUMERICAL, "numerical", exc, cell=cell.as_list() if cell is not None else None)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        # library precondition failures are reported as numerical failures
        return _fail(EXIT_NUMERICAL, "numerical", exc)
    print(json.dumps({"out": str(out), "outputs": manifest["outputs"]}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
