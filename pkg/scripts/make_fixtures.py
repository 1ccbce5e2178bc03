#!/usr/bin/env python3
"""Regenerate the committed mesh assets, seed curves, and run configs.

Everything here is deterministic, so re-running reproduces the repository
files byte for byte.
"""

import json
from pathlib import Path

import numpy as np

from geodesics import MeshBackend, PolyCurve, TriMesh, curve_to_json
from geodesics import meshgen

ROOT = Path(__file__).resolve().parent.parent


def write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def torus_seed(m, p, q, amp):
    t = np.arange(m) / m
    u = np.mod(p * t, 1.0)
    v = np.mod(q * t + amp * np.sin(2 * np.pi * t), 1.0)
    coords = np.stack([u, v], axis=1)
    coords[coords >= 1.0] = 0.0
    return PolyCurve("torus", coords, True)


def cube_belt_seed(backend: MeshBackend, m=128, wobble=0.02):
    t = np.arange(m) / m
    rows = []
    for ti in t:
        s = 4.0 * ti
        if s < 1:
            x, y = s, 0.0
        elif s < 2:
            x, y = 1.0, s - 1
        elif s < 3:
            x, y = 3 - s, 1.0
        else:
            x, y = 0.0, 4 - s
        z = 0.5 + wobble * np.sin(8 * np.pi * ti)
        rows.append(backend.closest_point([x, y, z]).coords)
    return PolyCurve("mesh", np.stack(rows), True)


def main() -> int:
    assets = ROOT / "assets"
    assets.mkdir(exist_ok=True)
    meshgen.write_obj(assets / "cube.obj", *meshgen.cube())
    meshgen.write_obj(assets / "icosphere3.obj", *meshgen.icosphere(3))

    seeds = ROOT / "configs" / "seeds"
    write_json(seeds / "torus_h.curve.json",
               curve_to_json(torus_seed(64, 1, 0, 0.1)))
    write_json(seeds / "torus_diag.curve.json",
               curve_to_json(torus_seed(64, 1, 1, 0.0)))
    cube_backend = MeshBackend(TriMesh(*meshgen.cube()), epsilon=0.8)
    write_json(seeds / "cube_belt.curve.json",
               curve_to_json(cube_belt_seed(cube_backend)))

    configs = ROOT / "configs"
    write_json(configs / "sphere_sweepout.json", {
        "mode": "sweepout",
        "backend": {"name": "sphere"},
        "discretization": {"grid_res": 16, "m": 128},
        "sweepout": {"map": "identity"},
        "output_dir": "out/sphere_sweepout",
    })
    write_json(configs / "torus_systole.json", {
        "mode": "systole",
        "backend": {"name": "torus"},
        "seeds": [{"file": "seeds/torus_h.curve.json"},
                  {"file": "seeds/torus_diag.curve.json"}],
        "output_dir": "out/torus_systole",
    })
    write_json(configs / "icosphere_sweepout.json", {
        "mode": "sweepout",
        "backend": {"name": "mesh", "path": "../assets/icosphere3.obj",
                    "epsilon": 1.2},
        "discretization": {"grid_res": 16, "m": 128},
        "tolerances": {"tol_move": 1e-5},
        "limits": {"max_sweep_iters": 160},
        "sweepout": {"map": "nearest"},
        "output_dir": "out/icosphere_sweepout",
    })
    write_json(configs / "cube_belt_shorten.json", {
        "mode": "shorten",
        "backend": {"name": "mesh", "path": "../assets/cube.obj",
                    "epsilon": 0.8},
        "tolerances": {"tol_move": 1e-6},
        "seeds": [{"file": "seeds/cube_belt.curve.json"}],
        "output_dir": "out/cube_belt",
    })
    write_json(configs / "collapse_sphere.json", {
        "mode": "sweepout",
        "backend": {"name": "sphere"},
        "discretization": {"grid_res": 8, "m": 64},
        "sweepout": {"map": "cap"},
        "output_dir": "out/collapse",
    })
    print(f"fixtures written under {ROOT}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
