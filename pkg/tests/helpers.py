"""Curve constructors and seeded corpora shared across the test modules."""

import numpy as np

from geodesics import MeshBackend, Point, PolyCurve


def orthonormal_frame(rng):
    """Random right-handed frame (e1, e2, e3)."""
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q[:, 0], q[:, 1], q[:, 2]


def sphere_circle(m, colat=np.pi / 2, frame=None, wobble=0.0, waves=3):
    """Closed curve on the unit sphere: a (possibly wobbled) circle at the
    given colatitude from the frame's third axis."""
    if frame is None:
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0])
        e3 = np.array([0.0, 0.0, 1.0])
    else:
        e1, e2, e3 = frame
    t = np.arange(m) / m
    phi = 2 * np.pi * t
    theta = colat + wobble * np.sin(waves * 2 * np.pi * t)
    pts = (np.sin(theta)[:, None] * (np.cos(phi)[:, None] * e1
                                     + np.sin(phi)[:, None] * e2)
           + np.cos(theta)[:, None] * e3)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return PolyCurve("sphere", pts, True)


def sphere_equator(m):
    return sphere_circle(m, colat=np.pi / 2)


def torus_loop(m, p=1, q=0, base=(0.0, 0.0), amp=0.0, waves=1):
    """Closed torus curve in homotopy class (p, q) with a transverse wiggle."""
    t = np.arange(m) / m
    u = np.mod(base[0] + p * t + amp * np.sin(waves * 2 * np.pi * t) * (q != 0),
               1.0)
    v = np.mod(base[1] + q * t + amp * np.sin(waves * 2 * np.pi * t) * (q == 0),
               1.0)
    coords = np.stack([u, v], axis=1)
    coords[coords >= 1.0] = 0.0
    return PolyCurve("torus", coords, True)


def mesh_snap_circle(backend: MeshBackend, m, center, radius, frame=None,
                     rng=None):
    """Closed mesh curve: a small 3-d circle snapped to the surface."""
    center = np.asarray(center, dtype=float)
    if frame is None:
        rng = rng or np.random.default_rng(0)
        e1, e2, _ = orthonormal_frame(rng)
    else:
        e1, e2, _ = frame
    # build the circle in the plane orthogonal-ish to center
    n = center / np.linalg.norm(center)
    e1 = e1 - (e1 @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    t = np.arange(m) / m
    ring = (center[None, :]
            + radius * (np.cos(2 * np.pi * t)[:, None] * e1
                        + np.sin(2 * np.pi * t)[:, None] * e2))
    rows = [backend.closest_point(x).coords for x in ring]
    return PolyCurve("mesh", np.stack(rows), True)


def random_sphere_curves(n, rng, m=48):
    out = []
    for _ in range(n):
        frame = orthonormal_frame(rng)
        colat = rng.uniform(0.4, np.pi / 2)
        wobble = rng.uniform(0.0, 0.05)
        out.append(sphere_circle(m, colat, frame, wobble,
                                 waves=int(rng.integers(1, 4))))
    return out


def random_torus_curves(n, rng, m=48):
    out = []
    for _ in range(n):
        kind = rng.integers(0, 2)
        base = rng.uniform(0.0, 1.0, size=2)
        amp = rng.uniform(0.0, 0.08)
        if kind == 0:
            out.append(torus_loop(m, 1, 0, base, amp,
                                  waves=int(rng.integers(1, 3))))
        else:
            # contractible rounded loop
            t = np.arange(m) / m
            r = rng.uniform(0.03, 0.1)
            coords = np.mod(np.stack([
                base[0] + r * np.cos(2 * np.pi * t),
                base[1] + r * np.sin(2 * np.pi * t)], axis=1), 1.0)
            coords[coords >= 1.0] = 0.0
            out.append(PolyCurve("torus", coords, True))
    return out


def random_mesh_curves(backend: MeshBackend, n, rng, m=32):
    out = []
    for _ in range(n):
        center = rng.normal(size=3)
        center /= np.linalg.norm(center)
        radius = rng.uniform(0.04, 0.08)
        out.append(mesh_snap_circle(backend, m, center, radius, rng=rng))
    return out


def random_point(space, rng) -> Point:
    if space.name == "sphere":
        u = rng.normal(size=3)
        return Point("sphere", u / np.linalg.norm(u))
    if space.name == "torus":
        return Point("torus", rng.uniform(0.0, 1.0, size=2))
    u = rng.normal(size=3)
    return space.closest_point(u / np.linalg.norm(u) * 1.0)


def nearby_point(space, p: Point, radius, rng) -> Point:
    """Point at (geodesic-ish) distance about `radius` from p."""
    if space.name == "sphere":
        u = p.coords
        d = rng.normal(size=3)
        d -= (d @ u) * u
        d /= np.linalg.norm(d)
        v = np.cos(radius) * u + np.sin(radius) * d
        return Point("sphere", v / np.linalg.norm(v))
    if space.name == "torus":
        d = rng.normal(size=2)
        d /= np.linalg.norm(d)
        v = np.mod(p.coords + radius * d, 1.0)
        v[v >= 1.0] = 0.0
        return Point("torus", v)
    x = space.embed_coords(p.coords)
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    return space.closest_point(x + radius * d)
