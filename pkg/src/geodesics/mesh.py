"""Triangulated surfaces with their intrinsic (induced length) metric.

Shortest paths are computed in two phases: a Steiner-graph route seeds the
crossing sequence, then iterative hinge/fan unfolding straightens it until
every interior crossing develops onto a straight line (tolerance 1e-7 rad,
cap 200 passes, reported as NoConvergence when hit).  Vertices whose cone
angle is below 2*pi act as obstacles: straightening pushes paths off them to
the shorter side, breaking ties deterministically.

TriMesh and SteinerGraph are immutable after construction; per-query scratch
arrays are query-local, so concurrent path queries need no coordination
(the ambiguity-event counter is the one guarded exception).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import COORD_TOL, OpenPath, Point, PolyCurve, SpaceBackend
from .errors import (
    DegenerateFace,
    Disconnected,
    GapTooWide,
    GeodesicError,
    InvalidPoint,
    NoConvergence,
    NonManifold,
    ParseError,
    TooFar,
)

STRAIGHTEN_TOL = 1e-7     # radians; interior crossings must develop straight
STRAIGHTEN_CAP = 200
LEN_FLOOR_FACTOR = 1e-6   # of the longest edge: bend-measurement resolution
PIN_SLACK_FACTOR = 1e-4   # of the longest edge: cone-vertex tie hysteresis
MIN_FACE_AREA = 1e-12
DEFAULT_STEINER_S = 4
_SUPPORT_SHORTCUT = True  # toggled during bisection


class TriMesh:
    """Validated triangle mesh with the adjacency tables the path machinery
    needs: per-face edge ids, per-edge faces, cyclically ordered vertex fans,
    corner angles, and cone angles.

    Raises NonManifold / Disconnected / DegenerateFace during construction,
    naming the offending element.
    """

    def __init__(self, vertices, faces):
        V = np.ascontiguousarray(vertices, dtype=float)
        F = np.ascontiguousarray(faces, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != 3:
            raise ParseError("vertices must be an (n, 3) array")
        if F.ndim != 2 or F.shape[1] != 3:
            raise ParseError("faces must be an (m, 3) array of triangles")
        if F.size and (F.min() < 0 or F.max() >= len(V)):
            raise ParseError(f"face vertex index out of range 0..{len(V) - 1}")
        self.V = V
        self.F = F
        self.nv = len(V)
        self.nf = len(F)
        self._build_edges()
        self._check_faces()
        self._build_angles()
        self._build_fans()
        self._check_connected()
        for arr in (self.V, self.F, self.edge_v, self.edge_f, self.face_edge,
                    self.edge_lengths, self.corner_angles, self.cone,
                    self.vf_indptr, self.vf_faces, self.ve_indptr,
                    self.ve_edges, self.corner_at_v, self.vboundary):
            arr.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    def _build_edges(self):
        edge_id: dict[tuple[int, int], int] = {}
        edge_faces: list[list[int]] = []
        face_edge = np.empty((self.nf, 3), dtype=np.int64)
        for f in range(self.nf):
            for j in range(3):
                a = int(self.F[f, j])
                b = int(self.F[f, (j + 1) % 3])
                if a == b:
                    raise DegenerateFace(f"face {f} repeats vertex {a}")
                key = (a, b) if a < b else (b, a)
                e = edge_id.get(key)
                if e is None:
                    e = len(edge_id)
                    edge_id[key] = e
                    edge_faces.append([])
                if len(edge_faces[e]) >= 2:
                    raise NonManifold(
                        f"edge ({key[0]}, {key[1]}) belongs to more than two faces"
                    )
                edge_faces[e].append(f)
                face_edge[f, j] = e
        self.ne = len(edge_id)
        self.edge_v = np.array(sorted(edge_id, key=edge_id.get),
                               dtype=np.int64).reshape(self.ne, 2)
        ef = np.full((self.ne, 2), -1, dtype=np.int64)
        for e, fs in enumerate(edge_faces):
            for s, f in enumerate(fs):
                ef[e, s] = f
        self.edge_f = ef
        self.face_edge = face_edge
        self.edge_lengths = np.linalg.norm(
            self.V[self.edge_v[:, 1]] - self.V[self.edge_v[:, 0]], axis=1)
        if self.ne and self.edge_lengths.min() <= 0.0:
            e = int(np.argmin(self.edge_lengths))
            raise DegenerateFace(f"edge {e} has zero length")
        self.has_boundary = bool(np.any(ef[:, 1] < 0))

    def _check_faces(self):
        a = self.V[self.F[:, 0]]
        areas = 0.5 * np.linalg.norm(
            np.cross(self.V[self.F[:, 1]] - a, self.V[self.F[:, 2]] - a),
            axis=1)
        bad = np.nonzero(areas <= MIN_FACE_AREA)[0]
        if bad.size:
            raise DegenerateFace(f"face {int(bad[0])} has area <= {MIN_FACE_AREA}")

    def _build_angles(self):
        ang = np.empty((self.nf, 3))
        for j in range(3):
            p = self.V[self.F[:, j]]
            u = self.V[self.F[:, (j + 1) % 3]] - p
            w = self.V[self.F[:, (j + 2) % 3]] - p
            c = np.einsum("ij,ij->i", u, w) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
            ang[:, j] = np.arccos(np.clip(c, -1.0, 1.0))
        self.corner_angles = ang
        cone = np.zeros(self.nv)
        for j in range(3):
            np.add.at(cone, self.F[:, j], ang[:, j])
        self.cone = cone

    def _build_fans(self):
        """Cyclic face/edge fans per vertex; alternation e0 f0 e1 f1 ... ed,
        where interior fans repeat the first edge at the end."""
        inc_faces: list[list[int]] = [[] for _ in range(self.nv)]
        for f in range(self.nf):
            for j in range(3):
                inc_faces[int(self.F[f, j])].append(f)

        vf_lists: list[list[int]] = []
        ve_lists: list[list[int]] = []
        vboundary = np.zeros(self.nv, dtype=np.uint8)

        def edges_at(f: int, v: int) -> tuple[int, int]:
            c = int(np.where(self.F[f] == v)[0][0])
            return int(self.face_edge[f, c]), int(self.face_edge[f, (c + 2) % 3])

        for v in range(self.nv):
            faces = inc_faces[v]
            if not faces:
                raise Disconnected(f"vertex {v} belongs to no face")
            # map each incident edge to the incident faces using it at v
            edge_use: dict[int, list[int]] = {}
            for f in faces:
                e1, e2 = edges_at(f, v)
                edge_use.setdefault(e1, []).append(f)
                edge_use.setdefault(e2, []).append(f)
            boundary_edges = sorted(e for e, fs in edge_use.items()
                                    if len(fs) == 1)
            if len(boundary_edges) not in (0, 2):
                raise NonManifold(
                    f"vertex {v} has {len(boundary_edges)} boundary edges in "
                    "its star"
                )
            start = boundary_edges[0] if boundary_edges else \
                min(edge_use.keys())
            fan_e = [start]
            fan_f = []
            used = set()
            e = start
            while True:
                nxt = [f for f in edge_use[e] if f not in used]
                if not nxt:
                    break
                f = min(nxt)
                used.add(f)
                e1, e2 = edges_at(f, v)
                e = e2 if e1 == e else e1
                fan_f.append(f)
                fan_e.append(e)
            if len(used) != len(faces):
                raise NonManifold(
                    f"vertex {v} has a non-disk star ({len(faces)} faces, "
                    f"{len(used)} reachable)"
                )
            if boundary_edges:
                vboundary[v] = 1
            elif fan_e[-1] != fan_e[0]:
                raise NonManifold(f"vertex {v} fan does not close up")
            vf_lists.append(fan_f)
            ve_lists.append(fan_e)

        self.vf_indptr = np.zeros(self.nv + 1, dtype=np.int64)
        self.ve_indptr = np.zeros(self.nv + 1, dtype=np.int64)
        for v in range(self.nv):
            self.vf_indptr[v + 1] = self.vf_indptr[v] + len(vf_lists[v])
            self.ve_indptr[v + 1] = self.ve_indptr[v] + len(ve_lists[v])
        self.vf_faces = np.concatenate(
            [np.asarray(x, dtype=np.int64) for x in vf_lists])
        self.ve_edges = np.concatenate(
            [np.asarray(x, dtype=np.int64) for x in ve_lists])
        self.vboundary = vboundary
        # corner angle of each fan face at its vertex, aligned with vf_faces
        corner_at_v = np.empty(len(self.vf_faces))
        for v in range(self.nv):
            for p in range(self.vf_indptr[v], self.vf_indptr[v + 1]):
                f = self.vf_faces[p]
                c = int(np.where(self.F[f] == v)[0][0])
                corner_at_v[p] = self.corner_angles[f, c]
        self.corner_at_v = corner_at_v

    def _check_connected(self):
        seen = np.zeros(self.nf, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            f = stack.pop()
            for j in range(3):
                e = self.face_edge[f, j]
                for s in range(2):
                    g = self.edge_f[e, s]
                    if g >= 0 and not seen[g]:
                        seen[g] = True
                        stack.append(int(g))
        if not seen.all():
            raise Disconnected(
                f"mesh splits into components; face {int(np.nonzero(~seen)[0][0])} "
                "is unreachable from face 0"
            )

    # -- geometry helpers ------------------------------------------------------

    def embed(self, face: int, bary: np.ndarray) -> np.ndarray:
        """3-d position of a barycentric point."""
        return bary @ self.V[self.F[face]]

    def bary_of(self, face: int, x: np.ndarray) -> np.ndarray:
        """Barycentric coordinates of an in-face 3-d point (clips fp dust)."""
        a = self.V[self.F[face, 0]]
        e1 = self.V[self.F[face, 1]] - a
        e2 = self.V[self.F[face, 2]] - a
        r = x - a
        g11, g12, g22 = e1 @ e1, e1 @ e2, e2 @ e2
        det = g11 * g22 - g12 * g12
        u = (g22 * (e1 @ r) - g12 * (e2 @ r)) / det
        w = (g11 * (e2 @ r) - g12 * (e1 @ r)) / det
        bary = np.array([1.0 - u - w, u, w])
        bary[np.abs(bary) < 1e-13] = 0.0
        bary = np.clip(bary, 0.0, None)
        return bary / bary.sum()


def load_mesh(path) -> TriMesh:
    """Load a triangles-only Wavefront OBJ (v/f records)."""
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    try:
        fh = open(path)
    except OSError as exc:
        raise ParseError(f"cannot open mesh file {path}: {exc}") from exc
    with fh:
        for ln, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ParseError(f"line {ln}: vertex needs 3 coordinates")
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [p.split("/")[0] for p in parts[1:]]
                if len(idx) != 3:
                    raise ParseError(
                        f"line {ln}: face {len(faces)} has {len(idx)} vertices; "
                        "only triangles are supported"
                    )
                try:
                    tri = [int(i) for i in idx]
                except ValueError as exc:
                    raise ParseError(f"line {ln}: bad face index") from exc
                if any(i <= 0 for i in tri):
                    raise ParseError(
                        f"line {ln}: face indices must be positive (1-based)"
                    )
                faces.append([i - 1 for i in tri])
            # vn / vt / o / g / s / usemtl / mtllib records are ignored
    if not verts or not faces:
        raise ParseError(f"{path}: no triangles found")
    return TriMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))


class SteinerGraph:
    """Graph of mesh vertices plus `s` evenly spaced points per edge, with
    intra-face straight segments between all boundary nodes of each face.

    Used only to seed path queries in the right strip homotopy class; the
    straightening phase does the precision work.
    """

    def __init__(self, mesh: TriMesh, s: int = DEFAULT_STEINER_S):
        if s < 1:
            raise ValueError(f"steiner subdivision s must be >= 1, got {s}")
        self.s = int(s)
        self.mesh = mesh
        nv, ne, nf = mesh.nv, mesh.ne, mesh.nf
        self.n_nodes = nv + ne * s

        pos = np.empty((self.n_nodes, 3))
        pos[:nv] = mesh.V
        fr = (np.arange(1, s + 1) / (s + 1.0))[None, :, None]
        a = mesh.V[mesh.edge_v[:, 0]][:, None, :]
        b = mesh.V[mesh.edge_v[:, 1]][:, None, :]
        pos[nv:] = ((1.0 - fr) * a + fr * b).reshape(ne * s, 3)
        self.pos = pos

        # per-face boundary nodes: 3 corners + s nodes per edge
        fn = np.empty((nf, 3 + 3 * s), dtype=np.int64)
        fn[:, :3] = mesh.F
        for j in range(3):
            e = mesh.face_edge[:, j]
            fn[:, 3 + j * s: 3 + (j + 1) * s] = \
                nv + e[:, None] * s + np.arange(s)[None, :]
        self.face_nodes = fn

        # all intra-face pairs, deduplicated across faces
        k = fn.shape[1]
        iu, ju = np.triu_indices(k, 1)
        A = fn[:, iu].ravel()
        B = fn[:, ju].ravel()
        lo = np.minimum(A, B)
        hi = np.maximum(A, B)
        key = lo * self.n_nodes + hi
        _, keep = np.unique(key, return_index=True)
        lo, hi = lo[keep], hi[keep]
        w = np.linalg.norm(pos[lo] - pos[hi], axis=1)

        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        ww = np.concatenate([w, w])
        order = np.argsort(src, kind="stable")
        src, dst, ww = src[order], dst[order], ww[order]
        counts = np.bincount(src, minlength=self.n_nodes)
        self.indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self.indices = dst.astype(np.int64)
        self.weights = ww
        for arr in (self.pos, self.face_nodes, self.indptr, self.indices,
                    self.weights):
            arr.setflags(write=False)

    def node_anchor(self, node: int) -> tuple[int, int, float]:
        """(kind, index, t) anchor encoding of a graph node."""
        nv = self.mesh.nv
        if node < nv:
            return 1, node, 0.0
        e, j = divmod(node - nv, self.s)
        return 0, e, (j + 1) / (self.s + 1.0)


def _vertex_girth(mesh: TriMesh, graph: SteinerGraph, v: int) -> float:
    """Shortest Steiner-graph loop encircling interior vertex v.

    The loop crosses every spoke edge of v's fan once; per spoke the
    candidates are its Steiner nodes and its far endpoint, and consecutive
    choices connect by straight intra-face segments.  Solved as a cyclic DP.
    """
    lo, hi = mesh.ve_indptr[v], mesh.ve_indptr[v + 1]
    spokes = mesh.ve_edges[lo:hi - 1]  # last repeats the first (interior v)
    d = len(spokes)
    nv = mesh.nv
    cand_pos = []
    for e in spokes:
        nodes = [nv + e * graph.s + j for j in range(graph.s)]
        far = int(mesh.edge_v[e, 1] if mesh.edge_v[e, 0] == v
                  else mesh.edge_v[e, 0])
        cand_pos.append(graph.pos[nodes + [far]])
    best = np.inf
    nc = graph.s + 1
    for first in range(nc):
        cost = np.full(nc, np.inf)
        cost[first] = 0.0
        for i in range(1, d + 1):
            prev = cand_pos[i - 1]
            cur = cand_pos[i % d]
            seg = np.linalg.norm(prev[:, None, :] - cur[None, :, :], axis=2)
            cost = np.min(cost[:, None] + seg, axis=0)
            if i == d:
                cost = np.where(np.arange(nc) == first, cost, np.inf)
        best = min(best, float(cost[first]))
    return best


def epsilon_estimate(mesh: TriMesh, steiner_s: int = DEFAULT_STEINER_S,
                     graph: SteinerGraph | None = None) -> float:
    """Heuristic uniqueness radius: min(0.5 * shortest edge * s_factor,
    0.25 * shortest vertex girth), the girth taken over interior vertices
    with cone angle < 2*pi.  A declared heuristic; callers may override."""
    s_factor = steiner_s / (steiner_s + 1.0)
    est = 0.5 * float(mesh.edge_lengths.min()) * s_factor
    singular = [v for v in range(mesh.nv)
                if mesh.vboundary[v] == 0 and mesh.cone[v] < 2 * np.pi - 1e-12]
    if singular:
        if graph is None:
            graph = SteinerGraph(mesh, steiner_s)
        girth = min(_vertex_girth(mesh, graph, v) for v in singular)
        est = min(est, 0.25 * girth)
    return est


@dataclass
class _PathResult:
    positions: np.ndarray      # (k, 3) polyline through anchors, endpoints incl.
    seg_faces: np.ndarray      # (k-1,) face carrying each straight segment
    length: float
    passes: int
    max_defect: float


class MeshBackend(SpaceBackend):
    """Space-backend facade over a TriMesh: intrinsic metric, unique-ish
    shortest paths below epsilon, and barycentric point bookkeeping.

    Parameters
    ----------
    mesh : TriMesh
    epsilon : float, optional
        Uniqueness-radius override; defaults to epsilon_estimate(mesh).
    steiner_s : int
        Subdivision points per edge in the seeding graph.
    """

    name = "mesh"
    dimension_hint = 2
    vectorized_rows = False  # every pair distance is a path query

    def __init__(self, mesh: TriMesh, epsilon: float | None = None,
                 steiner_s: int = DEFAULT_STEINER_S):
        self.mesh = mesh
        self.graph = SteinerGraph(mesh, steiner_s)
        self.steiner_s = int(steiner_s)
        self.epsilon_estimated = epsilon_estimate(mesh, steiner_s, self.graph)
        self.epsilon = float(epsilon) if epsilon is not None \
            else self.epsilon_estimated
        if self.epsilon <= 0:
            raise ValueError("mesh epsilon must be positive")
        self._amb_lock = threading.Lock()
        self.ambiguity_events = 0
        self._max_edge = float(mesh.edge_lengths.max())

    # -- points ---------------------------------------------------------------

    def point(self, face: int, bary) -> Point:
        """Construct a validated mesh point."""
        coords = np.concatenate(([float(face)], np.asarray(bary, dtype=float)))
        p = Point(self.name, coords)
        self.validate_point(p)
        return p

    def validate_coords(self, coords: np.ndarray) -> None:
        if coords.shape != (4,):
            raise InvalidPoint(
                f"mesh point needs [face, b0, b1, b2], got shape {coords.shape}"
            )
        face = coords[0]
        if face != int(face) or not 0 <= face < self.mesh.nf:
            raise InvalidPoint(f"mesh point face id {face!r} out of range")
        bary = coords[1:]
        if np.any(bary < -COORD_TOL):
            raise InvalidPoint(f"negative barycentric coords {bary.tolist()}")
        if abs(bary.sum() - 1.0) > COORD_TOL:
            raise InvalidPoint(
                f"barycentric coords sum to {bary.sum()!r}, expected 1"
            )

    def embed_coords(self, coords: np.ndarray) -> np.ndarray:
        return self.mesh.embed(int(coords[0]), coords[1:])

    def closest_point(self, x) -> Point:
        """Nearest surface point to an arbitrary 3-d location."""
        f, b0, b1, b2, _ = K.closest_point_on_mesh(
            self.mesh.V, self.mesh.F, np.asarray(x, dtype=float))
        bary = np.clip(np.array([b0, b1, b2]), 0.0, None)
        return self.point(int(f), bary / bary.sum())

    # -- metric ---------------------------------------------------------------

    def _record_ambiguity(self, n: int) -> None:
        if n:
            with self._amb_lock:
                self.ambiguity_events += int(n)

    def _support_faces(self, coords: np.ndarray) -> set:
        """Faces whose closure contains the point: its own face, plus the
        neighbors when it sits on an edge or vertex (zero barycentrics)."""
        mesh = self.mesh
        f = int(coords[0])
        bary = coords[1:]
        zeros = np.nonzero(bary <= 1e-9)[0]
        faces = {f}
        if len(zeros) == 1:
            e = mesh.face_edge[f, (int(zeros[0]) + 1) % 3]
            for g in mesh.edge_f[e]:
                if g >= 0:
                    faces.add(int(g))
        elif len(zeros) == 2:
            corner = ({0, 1, 2} - {int(z) for z in zeros}).pop()
            v = mesh.F[f, corner]
            lo, hi = mesh.vf_indptr[v], mesh.vf_indptr[v + 1]
            faces.update(int(g) for g in mesh.vf_faces[lo:hi])
        return faces

    def _hinge_fast(self, fa: int, pa: np.ndarray, fb: int,
                    pb: np.ndarray) -> float | None:
        """Exact distance across one shared edge, or None when a route
        around an edge endpoint could be shorter (cone check fails)."""
        mesh = self.mesh
        e = -1
        for j in range(3):
            cand = mesh.face_edge[fa, j]
            if cand in mesh.face_edge[fb]:
                e = int(cand)
                break
        if e < 0:
            return None
        ok, ln, xP, yP, xQ, yQ = K._hinge_coords(e, pa, pb, mesh.V,
                                                 mesh.edge_v)
        if not ok:
            return None
        if yQ - yP < 1e-300:
            return float(np.hypot(xQ - xP, yQ - yP))
        t = (xP + (xQ - xP) * (-yP) / (yQ - yP)) / ln
        if not 0.0 < t < 1.0:
            return None
        for v, vx in ((int(mesh.edge_v[e, 0]), 0.0),
                      (int(mesh.edge_v[e, 1]), ln)):
            if mesh.vboundary[v]:
                continue
            beta = K._angle3(xP - vx, yP, 0.0, xQ - vx, yQ, 0.0)
            if beta > 0.5 * mesh.cone[v] + 1e-12:
                return None  # the far side of vertex v may be shorter
        return float(np.hypot(xQ - xP, yQ - yP))

    def _query(self, a: np.ndarray, b: np.ndarray) -> _PathResult:
        mesh, graph = self.mesh, self.graph
        fa, fb = int(a[0]), int(b[0])
        pa = self.embed_coords(a)
        pb = self.embed_coords(b)
        direct = float(np.linalg.norm(pb - pa))
        if fa == fb or direct < 1e-14:
            return _PathResult(np.vstack([pa, pb]), np.array([fa]),
                               direct, 0, 0.0)
        common = self._support_faces(a) & self._support_faces(b) \
            if _SUPPORT_SHORTCUT else set()
        if common:
            # both points lie in the closure of one triangle; the straight
            # in-face segment is the shortest path
            return _PathResult(np.vstack([pa, pb]),
                               np.array([min(common)]), direct, 0, 0.0)

        # seed: Steiner-graph route between the two faces
        seeds = graph.face_nodes[fa]
        seed_d = np.linalg.norm(graph.pos[seeds] - pa, axis=1)
        targets = graph.face_nodes[fb]
        cap = 1.25 * self.epsilon + 2.0 * self._max_edge
        dist, pred = K.dijkstra_csr(graph.indptr, graph.indices,
                                    graph.weights, seeds, seed_d, targets,
                                    cap)
        totals = dist[targets] + np.linalg.norm(graph.pos[targets] - pb,
                                                axis=1)
        tbest = int(targets[np.argmin(totals)])
        if not np.isfinite(totals.min()):
            raise TooFar(
                f"mesh_shortest_path: no route within {cap:.6g} between "
                f"faces {fa} and {fb}"
            )
        chain = [tbest]
        while pred[chain[-1]] >= 0:
            chain.append(int(pred[chain[-1]]))
        chain.reverse()

        capn = 8 * len(chain) + 128
        a_kind = np.empty(capn, dtype=np.int64)
        a_idx = np.empty(capn, dtype=np.int64)
        a_t = np.empty(capn)
        for i, node in enumerate(chain):
            k, idx, t = graph.node_anchor(node)
            a_kind[i], a_idx[i], a_t[i] = k, idx, t

        status, n, passes, defect, amb = K.straighten_path(
            a_kind, a_idx, a_t, len(chain), fa, pa, fb, pb,
            mesh.V, mesh.F, mesh.face_edge, mesh.edge_v, mesh.edge_f,
            mesh.cone, mesh.vf_indptr, mesh.vf_faces, mesh.ve_indptr,
            mesh.ve_edges, mesh.corner_at_v, mesh.vboundary,
            STRAIGHTEN_TOL, STRAIGHTEN_CAP, LEN_FLOOR_FACTOR * self._max_edge,
            PIN_SLACK_FACTOR * self._max_edge)
        self._record_ambiguity(amb)
        if status == K.STATUS_NO_CONVERGENCE:
            raise NoConvergence(
                f"mesh_shortest_path: straightening did not reach "
                f"{STRAIGHTEN_TOL} rad in {STRAIGHTEN_CAP} passes "
                f"(residual {defect:.3g})"
            )
        if status in (K.STATUS_CAPACITY, K.STATUS_INTERNAL):
            raise GeodesicError(
                f"mesh_shortest_path: internal straightening failure "
                f"(status {status})"
            )

        positions = np.empty((n + 2, 3))
        positions[0] = pa
        positions[-1] = pb
        for i in range(n):
            positions[i + 1] = K._anchor_pos(
                a_kind[i], a_idx[i], a_t[i], mesh.V, mesh.edge_v, pa, pb)
        kinds = np.concatenate(([2], np.where(a_kind[:n] >= 2, 2,
                                              a_kind[:n]), [2]))
        idxs = np.concatenate(([fa], a_idx[:n], [fb]))
        seg_faces = np.empty(n + 1, dtype=np.int64)
        for i in range(n + 1):
            f = K._common_face(int(kinds[i]), int(idxs[i]),
                               int(kinds[i + 1]), int(idxs[i + 1]),
                               mesh.F, mesh.face_edge, mesh.edge_f,
                               mesh.vf_indptr, mesh.vf_faces)
            if f < 0:
                raise GeodesicError(
                    "mesh_shortest_path: segment without a carrying face"
                )
            seg_faces[i] = f
        length = float(np.sum(np.linalg.norm(np.diff(positions, axis=0),
                                             axis=1)))
        return _PathResult(positions, seg_faces, length, passes, defect)

    def pair_distance(self, a: np.ndarray, b: np.ndarray) -> float:
        fa, fb = int(a[0]), int(b[0])
        pa = self.embed_coords(a)
        pb = self.embed_coords(b)
        if fa == fb:
            return float(np.linalg.norm(pb - pa))
        fast = self._hinge_fast(fa, pa, fb, pb)
        if fast is not None:
            return fast
        return self._query(a, b).length

    def gap_lengths(self, c: PolyCurve) -> np.ndarray:
        faces = c.coords[:, 0].astype(np.int64)
        pos = np.einsum("ij,ijk->ik", c.coords[:, 1:],
                        self.mesh.V[self.mesh.F[faces]])
        lengths, need = K.gap_distances(
            faces, pos, self.mesh.V, self.mesh.F, self.mesh.face_edge,
            self.mesh.edge_f, self.mesh.edge_v, self.mesh.cone,
            self.mesh.vboundary, c.closed)
        m = c.m
        for g in np.nonzero(need)[0]:
            j = (g + 1) % m
            lengths[g] = self.pair_distance(c.coords[g], c.coords[j])
        worst = int(np.argmax(lengths))
        if lengths[worst] >= self.epsilon:
            raise GapTooWide(
                f"gap {worst} has length {lengths[worst]:.6g} >= epsilon "
                f"{self.epsilon:.6g}"
            )
        return lengths

    def interpolate(self, a: np.ndarray, b: np.ndarray,
                    ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        res = self._query(a, b)
        seg = np.linalg.norm(np.diff(res.positions, axis=0), axis=1)
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        total = cum[-1]
        out = np.empty((ts.size, 4))
        if total < 1e-300:
            out[:] = a
            out[ts == 1.0] = b
            return out
        arc = ts * total
        idx = np.clip(np.searchsorted(cum, arc, side="right") - 1,
                      0, len(seg) - 1)
        for row, (t, i) in enumerate(zip(arc, idx)):
            if ts[row] == 0.0:
                out[row] = a
                continue
            if ts[row] == 1.0:
                out[row] = b
                continue
            u = (t - cum[i]) / seg[i] if seg[i] > 0 else 0.0
            x = (1.0 - u) * res.positions[i] + u * res.positions[i + 1]
            f = int(res.seg_faces[i])
            out[row, 0] = f
            out[row, 1:] = self.mesh.bary_of(f, x)
        return out

    # -- gap fast-path check used by hinge gap kernel is in _kernels ----------

    def path_details(self, a: Point, b: Point) -> _PathResult:
        """Full two-phase query result (polyline, faces, length, passes)."""
        self.validate_point(a)
        self.validate_point(b)
        return self._query(a.coords, b.coords)


def mesh_shortest_path(mesh: MeshBackend, a: Point, b: Point,
                       samples: int) -> OpenPath:
    """Two-phase intrinsic shortest path sampled uniformly in arc length."""
    from .core import shortest_path as _sp
    return _sp(mesh, a, b, samples)


def mesh_distance(mesh: MeshBackend, a: Point, b: Point) -> float:
    """Length of mesh_shortest_path(a, b); TooFar beyond epsilon."""
    mesh.validate_point(a)
    mesh.validate_point(b)
    d = mesh.pair_distance(a.coords, b.coords)
    if d > mesh.epsilon:
        raise TooFar(
            f"mesh_distance: d = {d:.6g} exceeds epsilon {mesh.epsilon:.6g}"
        )
    return d
