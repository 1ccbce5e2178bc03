"""Batch front end: config-driven sweep-out, systole, shorten, and certify
runs with JSON/CSV/OBJ artifact export.

Usage:
    geodesic run --config cfg.json [--set key=value ...]

The config is a single JSON document; ``--set`` overrides use dotted paths
(for example ``--set discretization.m=64``).  Every effective parameter,
including defaulted ones, is echoed back into report.json, so a report
fully describes its run.  Exit status: 0 on certified success, 2 when the
algorithm reports an honest failure (FamilyCollapsed, NoneConverged,
NoConvergence, no certification), 1 on config or I/O errors.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .analytic import SphereBackend, TorusBackend
from .core import Point, curve_from_json, curve_to_json
from .errors import (
    FamilyCollapsed,
    GeodesicError,
    NoConvergence,
    NoneConverged,
    ParseError,
)
from .mesh import MeshBackend, load_mesh
from .shortening import ShorteningParams, shorten_to_limit
from .sweepout import (
    build_family,
    certify_geodesic,
    minimax_run,
    systole_search,
)

MODES = ("sweepout", "systole", "shorten", "certify")
BACKENDS = ("sphere", "torus", "mesh")
SWEEP_MAPS = ("identity", "nearest", "cap")

DEFAULTS = {
    "mode": "sweepout",
    "backend": {
        "name": "sphere",
        "radius": 1.0,
        "side": 1.0,
        "path": None,
        "epsilon": None,
    },
    "discretization": {"grid_res": 16, "m": 128, "steiner_s": 4},
    "tolerances": {"tol_length": 1e-7, "tol_move": None, "certify_tol": 1e-4},
    "limits": {"max_iter": 10000, "max_sweep_iters": 200, "m_max": 4096},
    "sweepout": {
        "n": 2,
        "map": "identity",
        "cap_center": [0.0, 0.0, 1.0],
        "cap_scale": None,
        "noncontractible_asserted": True,
    },
    "seeds": [],
    "rng_seed": 0,
    "output_dir": "out",
}


class ConfigError(Exception):
    """Configuration problem; message names the offending field."""


def _merge(defaults, user, path=""):
    if isinstance(defaults, dict):
        if not isinstance(user, dict):
            raise ConfigError(f"config field '{path or '<root>'}' must be an "
                              f"object, got {type(user).__name__}")
        out = copy.deepcopy(defaults)
        for key, val in user.items():
            here = f"{path}.{key}" if path else key
            if key not in defaults and path in ("", "backend",
                                                "discretization",
                                                "tolerances", "limits",
                                                "sweepout"):
                raise ConfigError(f"unknown config field '{here}'")
            if key in defaults and isinstance(defaults[key], dict):
                out[key] = _merge(defaults[key], val, here)
            else:
                out[key] = copy.deepcopy(val)
        return out
    return copy.deepcopy(user)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _validate(cfg: dict) -> None:
    _require(cfg["mode"] in MODES,
             f"config field 'mode' must be one of {MODES}, got "
             f"{cfg['mode']!r}")
    b = cfg["backend"]
    _require(b["name"] in BACKENDS,
             f"config field 'backend.name' must be one of {BACKENDS}, got "
             f"{b['name']!r}")
    if b["name"] == "mesh":
        _require(bool(b["path"]),
                 "config field 'backend.path' is required for the mesh "
                 "backend")
    d = cfg["discretization"]
    _require(int(d["grid_res"]) >= 1, "config field 'discretization.grid_res' "
             "must be >= 1")
    _require(int(d["m"]) >= 3, "config field 'discretization.m' must be >= 3")
    _require(int(d["steiner_s"]) >= 1,
             "config field 'discretization.steiner_s' must be >= 1")
    t = cfg["tolerances"]
    _require(float(t["tol_length"]) > 0,
             "config field 'tolerances.tol_length' must be positive")
    _require(t["tol_move"] is None or float(t["tol_move"]) > 0,
             "config field 'tolerances.tol_move' must be positive or null")
    _require(float(t["certify_tol"]) > 0,
             "config field 'tolerances.certify_tol' must be positive")
    lim = cfg["limits"]
    for key in ("max_iter", "max_sweep_iters", "m_max"):
        _require(int(lim[key]) >= 1,
                 f"config field 'limits.{key}' must be >= 1")
    sw = cfg["sweepout"]
    _require(int(sw["n"]) == 2,
             "config field 'sweepout.n': only n = 2 sweep-out drivers ship")
    _require(sw["map"] in SWEEP_MAPS,
             f"config field 'sweepout.map' must be one of {SWEEP_MAPS}, got "
             f"{sw['map']!r}")
    if cfg["mode"] in ("systole", "shorten", "certify"):
        _require(len(cfg["seeds"]) >= 1,
                 f"config field 'seeds' must list at least one curve for "
                 f"mode '{cfg['mode']}'")


def _apply_set(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"--set path '{key}' does not exist in config")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"--set path '{key}' does not exist in config")
    node[parts[-1]] = value


def _build_backend(cfg: dict, config_dir: Path):
    b = cfg["backend"]
    eps = b["epsilon"]
    if b["name"] == "sphere":
        return SphereBackend(radius=float(b["radius"]),
                             epsilon=None if eps is None else float(eps))
    if b["name"] == "torus":
        return TorusBackend(side=float(b["side"]),
                            epsilon=None if eps is None else float(eps))
    path = Path(b["path"])
    if not path.is_absolute():
        path = config_dir / path
    mesh = load_mesh(path)
    return MeshBackend(mesh, epsilon=None if eps is None else float(eps),
                       steiner_s=int(cfg["discretization"]["steiner_s"]))


def _sweep_map(cfg: dict, space):
    choice = cfg["sweepout"]["map"]
    if choice == "identity":
        if space.name != "sphere":
            raise ConfigError(
                "config field 'sweepout.map': 'identity' needs the sphere "
                "backend"
            )
        return lambda u: Point("sphere", u / np.linalg.norm(u))
    if choice == "nearest":
        if space.name != "mesh":
            raise ConfigError(
                "config field 'sweepout.map': 'nearest' needs the mesh backend"
            )
        return space.closest_point
    if space.name != "sphere":
        raise ConfigError(
            "config field 'sweepout.map': 'cap' needs the sphere backend"
        )
    center = np.asarray(cfg["sweepout"]["cap_center"], dtype=float)
    center = center / np.linalg.norm(center)
    scale = cfg["sweepout"]["cap_scale"]
    if scale is None:
        scale = space.epsilon / (4.0 * np.pi * space.radius)
    scale = float(scale)

    def cap(u):
        coords = space.interpolate(center, u / np.linalg.norm(u),
                                   np.array([scale]))[0]
        return Point("sphere", coords)

    return cap


def _load_seeds(cfg: dict, space, config_dir: Path):
    seeds = []
    for i, doc in enumerate(cfg["seeds"]):
        if isinstance(doc, dict) and "file" in doc:
            path = Path(doc["file"])
            if not path.is_absolute():
                path = config_dir / path
            try:
                with open(path) as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"seeds[{i}]: cannot read curve file "
                                  f"{path}: {exc}") from exc
        try:
            seeds.append(curve_from_json(doc, space))
        except GeodesicError as exc:
            raise ConfigError(f"seeds[{i}]: {exc}") from exc
    return seeds


def _shortening_params(cfg: dict) -> ShorteningParams:
    t, lim = cfg["tolerances"], cfg["limits"]
    return ShorteningParams(
        tol_length=float(t["tol_length"]),
        tol_move=None if t["tol_move"] is None else float(t["tol_move"]),
        max_iter=int(lim["max_iter"]),
        m_max=int(lim["m_max"]),
    )


def _write_candidate(outdir: Path, curve, space) -> None:
    with open(outdir / "candidate.curve.json", "w") as fh:
        json.dump(curve_to_json(curve), fh, sort_keys=True, indent=2)
        fh.write("\n")
    if space.name == "mesh":
        with open(outdir / "candidate.obj", "w") as fh:
            for row in curve.coords:
                x = space.embed_coords(row)
                fh.write(f"v {x[0]:.17g} {x[1]:.17g} {x[2]:.17g}\n")
            idx = list(range(1, curve.m + 1))
            if curve.closed:
                idx.append(1)
            fh.write("l " + " ".join(str(i) for i in idx) + "\n")


def run(cfg: dict, config_dir: Path) -> int:
    """Execute one validated config; writes artifacts, returns exit status."""
    t0 = time.perf_counter()
    space = _build_backend(cfg, config_dir)
    echo = copy.deepcopy(cfg)
    echo["backend"]["epsilon_used"] = float(space.epsilon)
    if space.name == "mesh":
        echo["backend"]["epsilon_estimated"] = float(space.epsilon_estimated)

    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    params = _shortening_params(cfg)
    certify_tol = float(cfg["tolerances"]["certify_tol"])
    mode = cfg["mode"]
    d = cfg["discretization"]

    result: dict = {}
    error: dict | None = None
    trace_csv = "iteration,length,sup_move\n"
    candidate = None
    success = False
    amb_before = getattr(space, "ambiguity_events", 0)

    try:
        if mode == "sweepout":
            fmap = _sweep_map(cfg, space)
            family = build_family(space, fmap, int(cfg["sweepout"]["n"]),
                                  int(d["grid_res"]), int(d["m"]))
            report = minimax_run(
                space, family, params,
                max_sweep_iters=int(cfg["limits"]["max_sweep_iters"]),
                certify_tol=certify_tol,
                noncontractible_asserted=bool(
                    cfg["sweepout"]["noncontractible_asserted"]),
            )
            result = report.to_dict()
            trace_csv = report.c_seq_csv()
            candidate = report.candidate
            success = (report.status == "Converged"
                       and report.certified.passed and report.epsilon_check)
        elif mode == "systole":
            seeds = _load_seeds(cfg, space, config_dir)
            report = systole_search(
                space, seeds, params, certify_tol=certify_tol,
                noncontractible_asserted=bool(
                    cfg["sweepout"]["noncontractible_asserted"]),
            )
            result = report.to_dict()
            if report.curve is not None:
                candidate = report.curve
                best = int(np.argmin([
                    s.length if s.status == "Converged" and not s.contractible
                    else np.inf for s in report.seeds]))
                trace_csv = report.seeds[best].trace.to_csv()
                success = report.certified.passed
        elif mode == "shorten":
            seeds = _load_seeds(cfg, space, config_dir)
            limit, trace = shorten_to_limit(space, seeds[0], params)
            certified = certify_geodesic(space, limit, tol=certify_tol)
            result = {
                "length": float(trace.lengths[-1]),
                "status": trace.status,
                "iterations": len(trace.lengths) - 1,
                "k": trace.k,
                "certified": certified.to_dict(),
            }
            trace_csv = trace.to_csv()
            candidate = limit
            success = trace.status == "Converged" and certified.passed
        else:  # certify
            seeds = _load_seeds(cfg, space, config_dir)
            certified = certify_geodesic(space, seeds[0], tol=certify_tol)
            result = {"certified": certified.to_dict()}
            candidate = seeds[0]
            success = certified.passed
    except FamilyCollapsed as exc:
        error = {"type": "FamilyCollapsed", "message": str(exc),
                 "iteration": exc.iteration}
    except NoneConverged as exc:
        error = {"type": "NoneConverged", "message": str(exc)}
    except NoConvergence as exc:
        error = {"type": "NoConvergence", "message": str(exc)}

    amb_after = getattr(space, "ambiguity_events", 0)
    if space.name == "mesh":
        result["ambiguity_events"] = int(amb_after - amb_before)

    report_doc = {
        "mode": mode,
        "config": echo,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "runtime_seconds": time.perf_counter() - t0,
        "result": result,
        "error": error,
        "success": success,
    }
    with open(outdir / "report.json", "w") as fh:
        json.dump(report_doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(outdir / "trace.csv", "w") as fh:
        fh.write(trace_csv)
    if candidate is not None:
        _write_candidate(outdir, candidate, space)

    if error is not None:
        print(f"geodesic run: {error['type']}: {error['message']}",
              file=sys.stderr)
        return 2
    return 0 if success else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="geodesic",
        description="Find periodic geodesics by curve shortening and "
                    "minimax sweep-outs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    prun = sub.add_parser("run", help="execute a config-driven run")
    prun.add_argument("--config", required=True, help="path to a JSON config")
    prun.add_argument("--set", action="append", default=[], metavar="KEY=VAL",
                      dest="overrides",
                      help="dotted-path config override (repeatable)")
    args = parser.parse_args(argv)

    try:
        config_path = Path(args.config)
        try:
            with open(config_path) as fh:
                user_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {config_path} is not valid JSON: {exc}")
        cfg = _merge(DEFAULTS, user_cfg)
        for assignment in args.overrides:
            _apply_set(cfg, assignment)
        _validate(cfg)
    except ConfigError as exc:
        print(f"geodesic: config error: {exc}", file=sys.stderr)
        return 1

    try:
        return run(cfg, config_path.resolve().parent)
    except ConfigError as exc:
        print(f"geodesic: config error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"geodesic: input error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"geodesic: i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
