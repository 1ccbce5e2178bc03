#!/usr/bin/env python3
"""Benchmark the jitted mesh kernels against the interpreted fallback.

The same workloads run twice: once in the current process (numba on unless
GEODESICS_NO_NUMBA is set) and once in a subprocess with the fallback
forced.  Results are identical on both paths; only the wall time differs.

Usage: python benchmarks/bench_kernels.py [--queries N] [--skip-fallback]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def workloads(n_queries):
    import geodesics as G
    from geodesics import _kernels as K
    from geodesics import meshgen

    mesh = G.TriMesh(*meshgen.icosphere(2))
    backend = G.MeshBackend(mesh, epsilon=1.0)
    rng = np.random.default_rng(42)
    pairs = []
    for _ in range(n_queries):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        v = u + 0.3 * rng.normal(size=3)
        v /= np.linalg.norm(v)
        pairs.append((backend.closest_point(u), backend.closest_point(v)))

    results = {"numba": K.NUMBA_ENABLED}

    t0 = time.perf_counter()
    total = 0.0
    for a, b in pairs:
        total += backend.pair_distance(a.coords, b.coords)
    results["shortest_paths_s"] = time.perf_counter() - t0
    results["path_length_sum"] = total

    t0 = time.perf_counter()
    for _ in range(200):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        K.closest_point_on_mesh(mesh.V, mesh.F, u)
    results["closest_point_s"] = time.perf_counter() - t0

    cube = G.MeshBackend(G.TriMesh(*meshgen.cube()), epsilon=0.8)
    t = np.arange(64) / 64
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
        rows.append(cube.closest_point([x, y, 0.5 + 0.02 * np.sin(
            8 * np.pi * ti)]).coords)
    belt = G.PolyCurve("mesh", np.stack(rows), True)
    t0 = time.perf_counter()
    _, trace = G.shorten_to_limit(cube, belt,
                                  G.ShorteningParams(tol_move=1e-6))
    results["belt_shorten_s"] = time.perf_counter() - t0
    results["belt_length"] = trace.lengths[-1]
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--queries", type=int, default=30)
    parser.add_argument("--skip-fallback", action="store_true")
    parser.add_argument("--json", action="store_true",
                        help="print raw JSON (used by the subprocess)")
    args = parser.parse_args()

    res = workloads(args.queries)
    if args.json:
        print(json.dumps(res))
        return 0

    mode = "numba" if res["numba"] else "interpreted"
    rows = [(mode, res)]
    if not args.skip_fallback and res["numba"]:
        env = dict(os.environ, GEODESICS_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, __file__, "--queries", str(args.queries),
             "--json"],
            env=env, capture_output=True, text=True, check=True)
        rows.append(("interpreted", json.loads(out.stdout)))

    print(f"{'workload':28s}" + "".join(f"{name:>16s}" for name, _ in rows))
    for key, label in (("shortest_paths_s",
                        f"{args.queries} shortest paths"),
                       ("closest_point_s", "200 surface snaps"),
                       ("belt_shorten_s", "cube belt shorten")):
        line = f"{label:28s}"
        for _, r in rows:
            line += f"{r[key]:14.3f} s"
        print(line)
    if len(rows) == 2:
        a, b = rows[0][1], rows[1][1]
        assert abs(a["path_length_sum"] - b["path_length_sum"]) < 1e-9
        assert abs(a["belt_length"] - b["belt_length"]) < 1e-9
        print("results agree across both paths")
        for key in ("shortest_paths_s", "closest_point_s", "belt_shorten_s"):
            print(f"  speedup {key}: {b[key] / a[key]:6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
