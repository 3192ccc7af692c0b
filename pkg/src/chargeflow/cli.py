"""Command-line driver: data grids for the Gaussian and laser scenarios, and verification."""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import jsonschema
import numpy as np

from . import charge, gaussian, verify
from .core import PlaneWave
from .errors import AccuracyError, ConvergenceError, DomainError, RangeError
from .evolution import PulseParams, SolverConfig, evolve_pulse, extract_excitation, pulse_grid

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3


class ConfigError(Exception):
    """Invalid configuration file, override or parameter combination."""


# --- schemas and defaults -------------------------------------------------------

_RANGE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["start", "stop", "num"],
    "properties": {
        "start": {"type": "number"},
        "stop": {"type": "number"},
        "num": {"type": "integer", "minimum": 1},
        "log": {"type": "boolean"},
    },
}
_POS = {"type": "number", "exclusiveMinimum": 0}
_PACKET = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"x_g": {"type": "number"}, "p_g": {"type": "number"}, "sigma_p": _POS},
}
_CASE = {"enum": ["A", "B", "C", "D"]}
_WORKERS = {"type": "integer", "minimum": 1}


def _schema(properties: dict) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": properties}


SCHEMAS = {
    "gauss-map": _schema({
        "case": _CASE, "packet": _PACKET, "p0": {"type": ["number", "null"], "not": {"const": 0}},
        "x1": _RANGE, "x2": _RANGE, "workers": _WORKERS,
    }),
    "gauss-scan": _schema({
        "case": _CASE, "packet": _PACKET,
        "probes": {"type": "object", "additionalProperties": False,
                   "properties": {"x1": {"type": "number"}, "x2": {"type": "number"}}},
        "x_g": _RANGE, "p0": _RANGE, "workers": _WORKERS,
    }),
    "laser-sweep": _schema({
        "f0": {"oneOf": [{"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}, _RANGE]},
        "pulse": {"type": "object", "additionalProperties": False, "properties": {
            "wavelength_nm": _POS, "width_nm": _POS, "cycles": _POS, "x_center": {"type": "number"}}},
        "p0": {"type": "number", "not": {"const": 0}},
        "grid": {"type": "object", "additionalProperties": False, "properties": {
            "points": {"type": "integer", "minimum": 8}, "span": {"type": "number", "minimum": 3}}},
        "solver": {"type": "object", "additionalProperties": False, "properties": {
            "dt": _POS, "convergence": _POS, "check_convergence": {"type": "boolean"}}},
        "probes": {"type": "object", "additionalProperties": False, "properties": {
            "x1": {"type": ["number", "null"]}, "x2": {"type": ["number", "null"]}}},
        "threshold": _POS,
        "workers": _WORKERS,
    }),
    "verify": _schema({
        "case": _CASE,
        "checks": {"type": "array", "items": {"enum": sorted(verify.CHECKS)}, "uniqueItems": True},
        "tolerances": {"type": "object", "additionalProperties": False,
                       "properties": {k: _POS for k in verify.DEFAULT_TOLERANCES}},
        "density_weight": {"type": "number"},
        "plateau_sigmas": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
    }),
}

DEFAULTS = {
    "gauss-map": {
        "case": "A", "packet": {}, "p0": None,
        "x1": {"start": -10.0, "stop": 10.0, "num": 101},
        "x2": {"start": -10.0, "stop": 10.0, "num": 101},
        "workers": 1,
    },
    "gauss-scan": {
        "case": "A", "packet": {},
        "probes": {"x1": verify.SCAN_PROBES[0], "x2": verify.SCAN_PROBES[1]},
        "x_g": {"start": -10.0, "stop": 15.0, "num": 126},
        "p0": {"start": 0.5, "stop": 10.0, "num": 96},
        "workers": 1,
    },
    "laser-sweep": {
        "f0": {"start": 1e-5, "stop": 1e-4, "num": 10, "log": True},
        "pulse": {"wavelength_nm": 800.0, "width_nm": 800.0, "cycles": 4.0, "x_center": 0.0},
        "p0": 0.1,
        "grid": {"points": 32768, "span": 4.0},
        "solver": {"dt": 0.2, "convergence": 1e-8, "check_convergence": True},
        "probes": {"x1": None, "x2": None},
        "threshold": 1e-6,
        "workers": 1,
    },
    "verify": {
        "case": "A", "checks": sorted(verify.CHECKS), "tolerances": {}, "density_weight": 1.0,
        "plateau_sigmas": None, "seed": 0,
    },
}

COLUMNS = {
    "gauss-map": ["x1", "x2", "dqd"],
    "gauss-scan": ["x_g", "p0", "dqd"],
    "laser-sweep": ["f0", "a0", "dqd", "dq1", "dqc", "norm_drift", "dt_delta", "converged", "status"],
}

EPILOG = """\
scenarios and CSV columns (atomic units throughout):
  gauss-map    x1, x2, dqd      closed-form dQd(x2, x1) over a probe grid
  gauss-scan   x_g, p0, dqd     dQd between fixed probes vs packet centre and plane-wave momentum
  laser-sweep  f0, a0, dqd, dq1, dqc, norm_drift, dt_delta, converged, status
                                pulse propagation per peak field f0; dQd between the
                                interaction-region edges unless probes are given
  verify       JSON report      {"passed": bool, "checks": [{name, passed, tolerance, values}]}

configuration precedence: built-in defaults < --config file < --case < --override.
Overrides use dotted keys and JSON values, e.g. --override x1.num=51 --override p0=4.5.
CSV files start with '#' comment lines holding the fully resolved configuration.

exit codes: 0 success, 1 verification failure, 2 configuration error, 3 numerical-convergence error.
"""


# --- configuration ------------------------------------------------------------

def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in update.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _apply_override(cfg: dict, item: str) -> None:
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = node[part] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(f"override {key!r}: {part!r} is not an object")
        node = nxt
    node[parts[-1]] = value


def resolve_config(scenario: str, file_cfg: dict, case: str | None = None, overrides=()) -> dict:
    """Merge defaults, file values, ``--case`` and overrides, then validate."""
    if not isinstance(file_cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    cfg = _merge(DEFAULTS[scenario], file_cfg)
    if case is not None:
        if "case" not in SCHEMAS[scenario]["properties"]:
            raise ConfigError(f"--case does not apply to {scenario}")
        cfg["case"] = case
    for item in overrides:
        _apply_override(cfg, item)
    try:
        jsonschema.validate(cfg, SCHEMAS[scenario])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid configuration at {where}: {exc.message}") from None
    return cfg


def _range(spec: dict) -> np.ndarray:
    if spec.get("log"):
        if spec["start"] <= 0 or spec["stop"] <= 0:
            raise ConfigError("logarithmic ranges need positive bounds")
        return np.geomspace(spec["start"], spec["stop"], spec["num"])
    return np.linspace(spec["start"], spec["stop"], spec["num"])


def _packet(cfg: dict) -> gaussian.GaussianPacket:
    base = gaussian.case(cfg["case"])
    return gaussian.GaussianPacket(
        x_g=cfg["packet"].get("x_g", base.x_g),
        p_g=cfg["packet"].get("p_g", base.p_g),
        sigma_p=cfg["packet"].get("sigma_p", base.sigma_p),
    )


def _check_strip(g: gaussian.GaussianPacket, p0_values) -> None:
    worst = max(abs(p - g.p_g) for p in p0_values) / (2 * g.sigma_p)
    if worst > gaussian.CERF_MAX_IMAG:
        raise ConfigError(f"|p0 - p_G| / (2 sigma_p) = {worst:.3g} exceeds {gaussian.CERF_MAX_IMAG}")


# --- scenarios ------------------------------------------------------------------

def _map_row(g, p0, x1, x2_values):
    vals = gaussian.delta_qd_analytic(g, PlaneWave(p0), x1, x2_values)
    return [(float(x1), float(b), float(v)) for b, v in zip(x2_values, np.atleast_1d(vals))]


def _scan_row(g, probes, x_g, p0_values):
    packet = gaussian.GaussianPacket(x_g, g.p_g, g.sigma_p)
    return [(float(x_g), float(p), gaussian.delta_qd_analytic(packet, PlaneWave(p), *probes)) for p in p0_values]


def _run_rows(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_gauss_map(cfg: dict):
    g = _packet(cfg)
    p0 = cfg["p0"] if cfg["p0"] is not None else g.p_g
    if p0 == 0:
        raise ConfigError("p0 must be nonzero")
    _check_strip(g, [p0])
    x2 = _range(cfg["x2"])
    rows = _run_rows(partial(_map_row, g, p0, x2_values=x2), list(_range(cfg["x1"])), cfg["workers"])
    meta = {"case": cfg["case"], "x_g": g.x_g, "p_g": g.p_g, "sigma_p": g.sigma_p, "sigma_x": g.sigma_x, "p0": p0}
    return meta, [r for row in rows for r in row]


def cmd_gauss_scan(cfg: dict):
    g = _packet(cfg)
    p0 = _range(cfg["p0"])
    if np.any(p0 == 0):
        raise ConfigError("p0 range must not contain 0")
    _check_strip(g, p0)
    probes = (cfg["probes"]["x1"], cfg["probes"]["x2"])
    rows = _run_rows(partial(_scan_row, g, probes, p0_values=p0), list(_range(cfg["x_g"])), cfg["workers"])
    meta = {"case": cfg["case"], "p_g": g.p_g, "sigma_p": g.sigma_p, "sigma_x": g.sigma_x,
            "x1": probes[0], "x2": probes[1]}
    return meta, [r for row in rows for r in row]


def _laser_setup(cfg: dict):
    pulse = cfg["pulse"]
    template = PulseParams.laser(1.0, pulse["wavelength_nm"], pulse["width_nm"], pulse["cycles"], pulse["x_center"])
    grid = pulse_grid(template, points=cfg["grid"]["points"], span=cfg["grid"]["span"])
    p0 = round(cfg["p0"] / grid.dp) * grid.dp
    if p0 == 0:
        raise ConfigError(f"p0 = {cfg['p0']} rounds to 0 on the momentum lattice (dp = {grid.dp})")
    left, right = template.region
    x1 = cfg["probes"]["x1"] if cfg["probes"]["x1"] is not None else left
    x2 = cfg["probes"]["x2"] if cfg["probes"]["x2"] is not None else right
    return template, grid, p0, (x1, x2)


def laser_row(cfg: dict, f0: float) -> tuple:
    """One sweep row; solver failures are reported in the status column."""
    template, grid, p0, (x1, x2) = _laser_setup(cfg)
    scale = template.a0  # A0 per unit peak field
    pp = PulseParams(f0 * scale, template.omega0, template.tau, template.x_center, template.width)
    s = cfg["solver"]
    solver = SolverConfig(dt=s["dt"], convergence=s["convergence"], check_convergence=s["check_convergence"])
    pw = PlaneWave(p0)
    nan = float("nan")
    try:
        run = evolve_pulse(pw, pp, solver, grid)
    except ConvergenceError as exc:
        return (f0, pp.a0, nan, nan, nan, nan, nan, False, f"convergence: {exc}")
    dt_delta = nan if run.dt_delta is None else run.dt_delta
    try:
        psi1 = extract_excitation(run.psi, pw, threshold=cfg["threshold"])
        br = charge.delta_charge(psi1, pw, x1, x2, threshold=cfg["threshold"])
    except AccuracyError as exc:
        return (f0, pp.a0, nan, nan, nan, run.norm_drift, dt_delta, False, f"accuracy: {exc}")
    converged = run.dt_delta is not None
    return (f0, pp.a0, br.delta_qd, br.delta_q1, br.delta_qc, run.norm_drift, dt_delta, converged,
            "ok" if converged else "unchecked")


def cmd_laser_sweep(cfg: dict):
    f0 = cfg["f0"]
    values = [float(v) for v in (f0 if isinstance(f0, list) else _range(f0))]
    if any(v < 0 for v in values):
        raise ConfigError("f0 values must be non-negative")
    try:
        template, grid, p0, probes = _laser_setup(cfg)
    except (ValueError, DomainError) as exc:
        raise ConfigError(str(exc)) from None
    if not all(grid.contains(x) for x in probes):
        raise ConfigError(f"probes {probes} lie outside the simulation box")
    rows = _run_rows(partial(laser_row, cfg), values, cfg["workers"])
    meta = {"omega0": template.omega0, "tau": template.tau, "width": template.width,
            "a0_per_f0": template.a0, "p0_lattice": p0, "dx": grid.dx, "n": grid.n,
            "x1": probes[0], "x2": probes[1]}
    return meta, rows


def cmd_verify(cfg: dict) -> dict:
    results = verify.run_checks(cfg["checks"], cfg["tolerances"], case=cfg["case"],
                                density_weight=cfg["density_weight"], seed=cfg["seed"],
                                plateau_sigmas=cfg["plateau_sigmas"])
    return {"config": cfg, "passed": all(r.passed for r in results), "checks": [r.as_dict() for r in results]}


# --- output ---------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(scenario: str, cfg: dict, meta: dict, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# chargeflow {scenario}\n")
    buf.write(f"# config: {json.dumps(cfg, sort_keys=True)}\n")
    buf.write(f"# resolved: {json.dumps(meta, sort_keys=True)}\n")
    buf.write(f"# columns: {', '.join(COLUMNS[scenario])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS[scenario])
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _sanitize(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_sanitize(v) for v in obj]
    return obj


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chargeflow",
        description="Transported charge of a wave packet on a plane wave: data grids and verification.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("scenario", choices=sorted(SCHEMAS))
    parser.add_argument("--config", required=True, help="JSON configuration file ('{}' content uses defaults)")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--case", choices=["A", "B", "C", "D"], help="benchmark packet (Gaussian scenarios, verify)")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted configuration key with a JSON value; repeatable")
    return parser


def _load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.scenario, _load(args.config), args.case, args.override)
        if args.scenario == "verify":
            report = cmd_verify(cfg)
            _emit(json.dumps(_sanitize(report), indent=2, default=_json_default) + "\n", args.out)
            return EXIT_OK if report["passed"] else EXIT_VERIFY
        cmd = {"gauss-map": cmd_gauss_map, "gauss-scan": cmd_gauss_scan, "laser-sweep": cmd_laser_sweep}
        meta, rows = cmd[args.scenario](cfg)
        _emit(render_csv(args.scenario, cfg, meta, rows), args.out)
        return EXIT_OK
    except (ConfigError, RangeError) as exc:
        print(f"chargeflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, AccuracyError) as exc:
        print(f"chargeflow: numerical error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DomainError, ValueError) as exc:
        print(f"chargeflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
