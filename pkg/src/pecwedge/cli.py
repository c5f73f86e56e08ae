"""Command-line driver: map scans, single-point tensors, convergence report,
ring-mask spot tables.

Configs are single JSON documents validated fail-closed (unknown keys are
rejected with their path).  All lengths are in wavelength units; emitted
values are normalized rates (or k-normalized tensor entries for
green-point).  Datasets are byte-reproducible: fixed column order, repr
floats (shortest round-trip), LF line endings, no timestamps; the run
manifest (config hash, truncation, wall time) goes to a sidecar file.

Exit codes: 0 ok, 2 config error, 3 convergence-tolerance failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from .geometry import PointCart, in_vacuum, make_wedge
from .oracles import series_vs_oracle_report
from .parallel import Truncation
from .perpendicular import im_g_full
from .rates import Dipole, cdr_map_batch, decay_rate_batch
from .sted import StedParams, beam_profile, detection_probability, spot_size_table

K = 2.0 * math.pi  # lengths are in wavelengths throughout the CLI

MAP_COLUMNS = ("x_lambda", "y_lambda", "z_lambda", "value", "tail", "in_vacuum")
CONV_COLUMNS = ("height_lambda", "m_max", "p_max", "relative_error")
STED_COLUMNS = ("r_lambda", "R_lambda", "h", "eta", "P")


class ConfigError(ValueError):
    pass


def _expect(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _check_keys(obj, path, required, optional=()):
    _expect(isinstance(obj, dict), path, "expected an object")
    for key in obj:
        if key not in required and key not in optional:
            raise ConfigError(f"{path}.{key}: unknown key")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{path}.{key}: missing required key")


def _check_number(val, path, lo=None, hi=None):
    _expect(isinstance(val, (int, float)) and not isinstance(val, bool), path, "expected a number")
    v = float(val)
    _expect(math.isfinite(v), path, "must be finite")
    if lo is not None:
        _expect(v >= lo, path, f"must be >= {lo}")
    if hi is not None:
        _expect(v <= hi, path, f"must be <= {hi}")
    return v


def _check_vec3(val, path):
    _expect(isinstance(val, list) and len(val) == 3, path, "expected a 3-element array")
    return [_check_number(v, f"{path}[{i}]") for i, v in enumerate(val)]


def _check_truncation(val, path):
    _expect(isinstance(val, list) and len(val) == 2, path, "expected [m_max, p_max]")
    out = []
    for i, v in enumerate(val):
        _expect(isinstance(v, int) and not isinstance(v, bool), f"{path}[{i}]", "expected an integer")
        _expect(v >= 1, f"{path}[{i}]", "must be >= 1")
        out.append(v)
    return Truncation(out[0], out[1])


def _check_wedge(obj, path):
    _check_keys(obj, path, required=("interior_angle",), optional=("phi_face0",))
    interior = _check_number(obj["interior_angle"], f"{path}.interior_angle")
    _expect(0.0 < interior < 2 * math.pi, f"{path}.interior_angle", "must lie in (0, 2*pi)")
    face0 = _check_number(obj.get("phi_face0", 0.0), f"{path}.phi_face0")
    return make_wedge(interior, face0)


def _check_grid(obj, path):
    _check_keys(obj, path, required=("x", "y", "n"), optional=("z",))
    out = {}
    for axis in ("x", "y"):
        rng = obj[axis]
        _expect(isinstance(rng, list) and len(rng) == 2, f"{path}.{axis}", "expected [min, max]")
        lo = _check_number(rng[0], f"{path}.{axis}[0]")
        hi = _check_number(rng[1], f"{path}.{axis}[1]")
        _expect(hi > lo, f"{path}.{axis}", "max must exceed min")
        out[axis] = (lo, hi)
    n = obj["n"]
    _expect(isinstance(n, list) and len(n) == 2, f"{path}.n", "expected [nx, ny]")
    for i, v in enumerate(n):
        _expect(isinstance(v, int) and not isinstance(v, bool) and v >= 2, f"{path}.n[{i}]", "expected an integer >= 2")
    out["n"] = (n[0], n[1])
    out["z"] = _check_number(obj.get("z", 0.0), f"{path}.z")
    return out


_MODES = ("decay", "cdr", "green", "convergence", "sted")


def validate_config(cfg) -> dict:
    """Validate the raw JSON document; returns a normalized dict."""
    top_optional = ("truncation", "output", "tail_tolerance")
    by_mode = {
        "decay": ("wedge", "orientation", "grid"),
        "cdr": ("wedge", "grid", "donor"),
        "green": ("wedge", "points"),
        "convergence": ("wedge", "heights", "truncations", "orientation"),
        "sted": ("sted",),
    }
    _expect(isinstance(cfg, dict), "config", "expected an object")
    _expect(cfg.get("mode") in _MODES, "config.mode", f"expected one of {_MODES}")
    mode = cfg["mode"]
    required = ("mode",) + tuple(k for k in by_mode[mode] if k != "orientation" or mode == "decay")
    _check_keys(cfg, "config", required=required,
                optional=top_optional + (("orientation",) if mode == "convergence" else ()))
    out = {"mode": mode}
    if "wedge" in by_mode[mode]:
        out["wedge"] = _check_wedge(cfg["wedge"], "config.wedge")
    if mode in ("decay", "convergence"):
        if mode == "decay" or "orientation" in cfg:
            vec = np.array(_check_vec3(cfg["orientation"], "config.orientation")) if "orientation" in cfg else np.array([0.0, 0.0, 1.0])
        else:
            vec = np.array([0.0, 0.0, 1.0])
        norm = np.linalg.norm(vec)
        _expect(norm > 0, "config.orientation", "must be nonzero")
        out["orientation"] = vec / norm
    if mode in ("decay", "cdr"):
        out["grid"] = _check_grid(cfg["grid"], "config.grid")
    if mode == "cdr":
        _check_keys(cfg["donor"], "config.donor", required=("position", "orientation"))
        pos = _check_vec3(cfg["donor"]["position"], "config.donor.position")
        ori = np.array(_check_vec3(cfg["donor"]["orientation"], "config.donor.orientation"))
        norm = np.linalg.norm(ori)
        _expect(norm > 0, "config.donor.orientation", "must be nonzero")
        out["donor"] = Dipole(PointCart(*pos), ori / norm, 1.0)
    if mode == "green":
        _check_keys(cfg["points"], "config.points", required=("r", "r_prime"))
        out["r"] = PointCart(*_check_vec3(cfg["points"]["r"], "config.points.r"))
        out["r_prime"] = PointCart(*_check_vec3(cfg["points"]["r_prime"], "config.points.r_prime"))
    if mode == "convergence":
        h = cfg["heights"]
        _check_keys(h, "config.heights", required=("min", "max", "count"))
        lo = _check_number(h["min"], "config.heights.min", lo=1e-6)
        hi = _check_number(h["max"], "config.heights.max")
        _expect(hi > lo, "config.heights.max", "must exceed min")
        _expect(isinstance(h["count"], int) and h["count"] >= 2, "config.heights.count", "expected an integer >= 2")
        out["heights"] = np.linspace(lo, hi, h["count"])
        trs = cfg["truncations"]
        _expect(isinstance(trs, list) and trs, "config.truncations", "expected a non-empty array")
        out["truncations"] = [_check_truncation(t, f"config.truncations[{i}]") for i, t in enumerate(trs)]
        _expect(abs(out["wedge"].interior_angle - math.pi) < 1e-12, "config.wedge.interior_angle",
                "convergence mode requires the interior angle pi (no oracle otherwise)")
    if mode == "sted":
        s = cfg["sted"]
        _check_keys(s, "config.sted", required=("radii",), optional=("n_sin_alpha", "mask_height", "samples"))
        _expect(isinstance(s["radii"], list) and s["radii"], "config.sted.radii", "expected a non-empty array")
        out["radii"] = [_check_number(v, f"config.sted.radii[{i}]", lo=1e-6) for i, v in enumerate(s["radii"])]
        out["n_sin_alpha"] = _check_number(s.get("n_sin_alpha", 1.0), "config.sted.n_sin_alpha", lo=1e-6, hi=1.5)
        out["mask_height"] = _check_number(s.get("mask_height", 0.1), "config.sted.mask_height", lo=1e-6)
        out["samples"] = s.get("samples", 601)
        _expect(isinstance(out["samples"], int) and out["samples"] >= 11, "config.sted.samples", "expected an integer >= 11")
    if "truncation" in cfg:
        out["truncation"] = _check_truncation(cfg["truncation"], "config.truncation")
    else:
        out["truncation"] = Truncation(10, 10)
    if "tail_tolerance" in cfg and cfg["tail_tolerance"] is not None:
        out["tail_tolerance"] = _check_number(cfg["tail_tolerance"], "config.tail_tolerance", lo=0.0)
    if "output" in cfg:
        _check_keys(cfg["output"], "config.output", required=(), optional=("path", "format"))
        if "format" in cfg["output"]:
            _expect(cfg["output"]["format"] in ("csv", "json"), "config.output.format", "expected 'csv' or 'json'")
        out["output"] = dict(cfg["output"])
    return out


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_dataset(path: str, columns, rows, fmt: str):
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        doc = {"columns": list(columns), "rows": [[(int(v) if isinstance(v, (int, np.integer)) else float(v)) for v in row] for row in rows]}
        with open(path, "w", newline="\n") as fh:
            json.dump(doc, fh, separators=(",", ":"), allow_nan=True)
            fh.write("\n")


def _grid_points(grid):
    (x0, x1), (y0, y1) = grid["x"], grid["y"]
    nx, ny = grid["n"]
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    pts = []
    for iy in range(ny):
        for ix in range(nx):
            pts.append(PointCart(float(xs[ix]), float(ys[iy]), grid["z"]))
    return pts


def _map_rows(points, wedge, values, tails):
    rows = []
    j = 0
    for p in points:
        if in_vacuum(p, wedge).inside:
            rows.append((p.x, p.y, p.z, float(values[j]), float(tails[j]), 1))
            j += 1
        else:
            rows.append((p.x, p.y, p.z, float("nan"), float("nan"), 0))
    return rows


def _run_map(cfg):
    wedge = cfg["wedge"]
    trunc = cfg["truncation"]
    points = _grid_points(cfg["grid"])
    vacuum_pts = [p for p in points if in_vacuum(p, wedge).inside]
    if cfg["mode"] == "decay":
        values, tails = decay_rate_batch(vacuum_pts, cfg["orientation"], wedge, K, trunc)
    else:
        donor = cfg["donor"]
        if not in_vacuum(donor.position, wedge).inside:
            raise ConfigError("config.donor.position: lies on the conductor")
        values, tails = cdr_map_batch(vacuum_pts, donor, wedge, trunc)
    return MAP_COLUMNS, _map_rows(points, wedge, values, tails), tails


def _run_green(cfg):
    wedge = cfg["wedge"]
    G = im_g_full(cfg["r"], cfg["r_prime"], wedge, K, cfg["truncation"])
    n0 = K / (6.0 * math.pi)
    rows = [(i, j, float(G.matrix[i, j] / n0)) for i in range(3) for j in range(3)]
    return ("i", "j", "value_over_free_space_ldos"), rows, np.array([G.tail_estimate / n0])


def _run_convergence(cfg):
    report = series_vs_oracle_report(
        cfg["heights"], cfg["truncations"], K, orientation=cfg["orientation"]
    )
    rows = []
    for i, h in enumerate(report["heights"]):
        for j, tr in enumerate(report["truncations"]):
            rows.append((h, tr.m_max, tr.p_max, float(report["relative_errors"][i, j])))
    return CONV_COLUMNS, rows, np.zeros(1)


def _run_sted(cfg):
    base = StedParams(
        hole_radius=cfg["radii"][0],
        n_sin_alpha=cfg["n_sin_alpha"],
        mask_height=cfg["mask_height"],
    )
    table = spot_size_table(cfg["radii"], base)
    rows = []
    spots = {}
    for params, spot in table:
        lo = params.hole_radius - 0.5 / params.n_sin_alpha
        hi = params.hole_radius + 0.5 / params.n_sin_alpha
        rs = np.linspace(lo, hi, cfg["samples"])
        h = beam_profile(rs, params)
        p = detection_probability(rs, params)
        eta = np.where(h > 0, p / np.where(h > 0, h, 1.0), np.exp(-params.gamma_map(rs)))
        for r, hh, ee, pp in zip(rs, h, eta, p):
            rows.append((float(r), params.hole_radius, float(hh), float(ee), float(pp)))
        spots[repr(params.hole_radius)] = {
            "delta_r_half": spot.delta_r_half,
            "p_max": spot.p_max,
            "root_brackets": list(spot.root_brackets),
            "peak_radius": spot.peak_radius,
        }
    return STED_COLUMNS, rows, np.zeros(1), spots


def run(cfg_raw: dict, out_path: str | None = None, fmt: str | None = None,
        trunc_override: Truncation | None = None) -> int:
    """Validate and execute one config; writes the dataset and its manifest."""
    t0 = time.perf_counter()
    cfg = validate_config(cfg_raw)
    if trunc_override is not None:
        cfg["truncation"] = trunc_override
    output = cfg.get("output", {})
    path = out_path or output.get("path")
    if not path:
        raise ConfigError("config.output.path: missing (or pass --out)")
    fmt = fmt or output.get("format", "csv")
    extra_manifest = {}
    if cfg["mode"] in ("decay", "cdr"):
        columns, rows, tails = _run_map(cfg)
    elif cfg["mode"] == "green":
        columns, rows, tails = _run_green(cfg)
    elif cfg["mode"] == "convergence":
        columns, rows, tails = _run_convergence(cfg)
    else:
        columns, rows, tails, spots = _run_sted(cfg)
        extra_manifest["spots"] = spots
    write_dataset(path, columns, rows, fmt)
    tol = cfg.get("tail_tolerance")
    n_over = int(np.sum(np.asarray(tails) > tol)) if tol is not None else 0
    manifest = {
        "config_sha256": hashlib.sha256(
            json.dumps(cfg_raw, sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest(),
        "mode": cfg["mode"],
        "truncation": [cfg["truncation"].m_max, cfg["truncation"].p_max],
        "rows": len(rows),
        "max_tail": float(np.max(tails)) if len(np.atleast_1d(tails)) else 0.0,
        "tail_tolerance": tol,
        "points_over_tolerance": n_over,
        "wall_time_s": time.perf_counter() - t0,
        **extra_manifest,
    }
    with open(path + ".manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return 3 if n_over > 0 else 0


_SUBCOMMAND_MODE = {
    "decay-map": "decay",
    "cdr-map": "cdr",
    "green-point": "green",
    "convergence": "convergence",
    "sted-spot": "sted",
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pecwedge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMAND_MODE:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="dataset output path")
        p.add_argument("--trunc", default=None, help="truncation override M,P")
        p.add_argument("--format", default=None, choices=("csv", "json"))
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg_raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    trunc = None
    if args.trunc:
        try:
            m, p = (int(v) for v in args.trunc.split(","))
            trunc = Truncation(m, p)
        except (ValueError, TypeError):
            print(f"config error: --trunc expects M,P with integers >= 1, got {args.trunc!r}", file=sys.stderr)
            return 2
    try:
        if cfg_raw.get("mode") != _SUBCOMMAND_MODE[args.command]:
            raise ConfigError(
                f"config.mode: {cfg_raw.get('mode')!r} does not match subcommand {args.command!r}"
            )
        return run(cfg_raw, out_path=args.out, fmt=args.format, trunc_override=trunc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
