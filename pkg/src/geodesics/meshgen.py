"""Deterministic triangle-mesh fixture generators.

All generators produce the same arrays on every run (fixed vertex order,
fixed subdivision order), so OBJ files written from them are byte-stable.
Run ``python -m geodesics.meshgen OUTDIR`` to write the standard fixtures
(cube, icosphere levels 1-4, flat patch) used by the test-suite and the
shipped configs.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np


def cube(side: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned cube [0, side]^3 as 12 triangles, outward orientation."""
    s = float(side)
    V = np.array([
        [0, 0, 0], [s, 0, 0], [s, s, 0], [0, s, 0],
        [0, 0, s], [s, 0, s], [s, s, s], [0, s, s],
    ], dtype=float)
    quads = [
        (0, 3, 2, 1),  # bottom (z=0), outward -z
        (4, 5, 6, 7),  # top (z=s)
        (0, 1, 5, 4),  # front (y=0)
        (1, 2, 6, 5),  # right (x=s)
        (2, 3, 7, 6),  # back (y=s)
        (3, 0, 4, 7),  # left (x=0)
    ]
    F = []
    for a, b, c, d in quads:
        F.append((a, b, c))
        F.append((a, c, d))
    return V, np.array(F, dtype=np.int64)


def icosphere(level: int = 3, radius: float = 1.0
              ) -> tuple[np.ndarray, np.ndarray]:
    """Icosahedron subdivided `level` times, vertices projected to the sphere.

    Vertex count is 10 * 4**level + 2 (level 3 gives 642).  The standard
    coordinate frame keeps the coordinate axes as 2-fold symmetry axes.
    """
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    V = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in verts]
    F = list(faces)
    for _ in range(level):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                p = V[i] + V[j]
                V.append(p / np.linalg.norm(p))
                midpoint[key] = len(V) - 1
            return midpoint[key]

        new_faces = []
        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc),
                          (ab, bc, ca)]
        F = new_faces
    V = np.asarray(V) * float(radius)
    return V, np.asarray(F, dtype=np.int64)


def flat_patch(nx: int = 8, ny: int = 8, spacing: float = 0.1
               ) -> tuple[np.ndarray, np.ndarray]:
    """Planar rectangular grid in z = 0, triangulated with one diagonal rule."""
    xs = np.arange(nx + 1) * spacing
    ys = np.arange(ny + 1) * spacing
    V = np.array([[x, y, 0.0] for y in ys for x in xs])
    F = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b = a + 1
            c = a + nx + 1
            d = c + 1
            F.append((a, b, d))
            F.append((a, d, c))
    return V, np.asarray(F, dtype=np.int64)


def write_obj(path, V: np.ndarray, F: np.ndarray) -> None:
    with open(path, "w") as fh:
        for v in V:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in F:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else argv
    outdir = Path(args[0]) if args else Path("assets")
    outdir.mkdir(parents=True, exist_ok=True)
    write_obj(outdir / "cube.obj", *cube())
    for level in (1, 2, 3, 4):
        write_obj(outdir / f"icosphere{level}.obj", *icosphere(level))
    write_obj(outdir / "flat_patch.obj", *flat_patch())
    print(f"wrote fixtures to {outdir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
