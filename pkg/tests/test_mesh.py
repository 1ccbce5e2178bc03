"""Triangulated-surface backend: loading, intrinsic metric, straightening."""

import itertools

import numpy as np
import pytest

from geodesics import (
    MeshBackend,
    TriMesh,
    curve_length,
    epsilon_estimate,
    load_mesh,
    mesh_distance,
    mesh_shortest_path,
)
from geodesics import meshgen
from geodesics import _kernels as K
from geodesics.errors import (
    DegenerateFace,
    Disconnected,
    InvalidPoint,
    NonManifold,
    ParseError,
    TooFar,
)

from helpers import nearby_point, random_point


# ---------------------------------------------------------------------------
# loading and validation
# ---------------------------------------------------------------------------

def test_cube_loads_with_corner_cones(tmp_path, cube_mesh):
    path = tmp_path / "cube.obj"
    meshgen.write_obj(path, *meshgen.cube())
    mesh = load_mesh(path)
    assert mesh.nv == 8
    assert mesh.nf == 12
    assert np.allclose(mesh.cone, 1.5 * np.pi, atol=1e-12)
    assert not mesh.has_boundary
    assert np.allclose(mesh.V, cube_mesh.V)


def test_icosphere_level3_counts():
    V, F = meshgen.icosphere(3)
    mesh = TriMesh(V, F)
    assert mesh.nv == 642
    assert mesh.nf == 1280
    assert not mesh.has_boundary  # closed manifold
    # Euler characteristic of the sphere
    assert mesh.nv - mesh.ne + mesh.nf == 2


def test_quad_face_rejected(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(ParseError, match="face 0 has 4 vertices"):
        load_mesh(path)


def test_nonmanifold_edge_rejected():
    V = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, -1, 0.0]])
    F = np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]])
    with pytest.raises(NonManifold, match="more than two faces"):
        TriMesh(V, F)


def test_disconnected_rejected():
    V = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0],
                  [5, 5, 5], [6, 5, 5], [5, 6, 5.0]])
    F = np.array([[0, 1, 2], [3, 4, 5]])
    with pytest.raises(Disconnected):
        TriMesh(V, F)


def test_degenerate_face_rejected():
    V = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0.0]])
    F = np.array([[0, 1, 2], [0, 1, 3]])
    with pytest.raises(DegenerateFace):
        TriMesh(V, F)


def test_pinched_vertex_rejected():
    # two triangle fans meeting only at vertex 0
    V = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0],
                  [-1, 0, 1], [-1, -1, 1.0]])
    F = np.array([[0, 1, 2], [0, 3, 4]])
    with pytest.raises(NonManifold, match="non-disk star|boundary edges"):
        TriMesh(V, F)


def test_mesh_point_validation(cube_backend):
    with pytest.raises(InvalidPoint):
        cube_backend.point(99, [1, 0, 0])
    with pytest.raises(InvalidPoint):
        cube_backend.point(0, [0.5, 0.6, -0.1])
    with pytest.raises(InvalidPoint):
        cube_backend.point(0, [0.5, 0.2, 0.2])  # sums to 0.9


# ---------------------------------------------------------------------------
# shortest paths
# ---------------------------------------------------------------------------

def test_cube_adjacent_face_centers(cube_mesh):
    # unfolding the two unit faces flattens the centers 1.0 apart
    mb = MeshBackend(cube_mesh, epsilon=1.5)
    a = mb.closest_point([0.5, 0.5, 0.0])
    b = mb.closest_point([0.5, 0.0, 0.5])
    d = mesh_distance(mb, a, b)
    assert abs(d - 1.0) < 1e-6


def test_flat_patch_matches_euclidean(rng):
    # wide patch and wide epsilon so paths cross many interior vertices:
    # on a flat surface every straightened path must be the straight segment
    mesh = TriMesh(*meshgen.flat_patch(12, 12, 0.13))
    wide = MeshBackend(mesh, epsilon=0.7)
    checked = 0
    for _ in range(300):
        x = rng.uniform(0.2, 1.3, size=2)
        y = rng.uniform(0.2, 1.3, size=2)
        ref = float(np.linalg.norm(x - y))
        if not 1e-6 < ref < 0.7:
            continue
        a = wide.closest_point([x[0], x[1], 0.0])
        b = wide.closest_point([y[0], y[1], 0.0])
        d = wide.pair_distance(a.coords, b.coords)
        assert abs(d - ref) < 1e-9
        checked += 1
    assert checked > 150


def test_identical_endpoints(cube_backend):
    a = cube_backend.closest_point([0.3, 0.4, 0.0])
    p = mesh_shortest_path(cube_backend, a, a, 4)
    assert p.m == 4
    assert curve_length(cube_backend, p) == 0.0


def test_path_samples_equally_spaced(ico3_backend, rng):
    for _ in range(20):
        a = random_point(ico3_backend, rng)
        b = nearby_point(ico3_backend, a, 0.4, rng)
        p = mesh_shortest_path(ico3_backend, a, b, 12)
        gaps = ico3_backend.gap_lengths(p)
        if gaps.mean() < 1e-9:
            continue
        assert (gaps.max() - gaps.min()) / gaps.mean() < 1e-6
        d = ico3_backend.pair_distance(a.coords, b.coords)
        assert abs(float(np.sum(gaps)) - d) <= 1e-9 * max(1.0, d)


def test_too_far_raises(ico3_backend):
    a = ico3_backend.closest_point([0.0, 0.0, 1.0])
    b = ico3_backend.closest_point([0.0, 0.0, -1.0])
    with pytest.raises(TooFar):
        mesh_distance(ico3_backend, a, b)


def test_straightening_never_lengthens(ico3_backend, rng):
    # phase-2 output must not exceed the phase-1 graph seed
    mb = ico3_backend
    graph = mb.graph
    for _ in range(50):
        a = random_point(mb, rng)
        b = nearby_point(mb, a, rng.uniform(0.1, 0.5), rng)
        fa, fb = int(a.coords[0]), int(b.coords[0])
        if fa == fb:
            continue
        pa = mb.embed_coords(a.coords)
        pb = mb.embed_coords(b.coords)
        seeds = graph.face_nodes[fa]
        seed_d = np.linalg.norm(graph.pos[seeds] - pa, axis=1)
        targets = graph.face_nodes[fb]
        dist, _ = K.dijkstra_csr(graph.indptr, graph.indices, graph.weights,
                                 seeds, seed_d, targets, np.inf)
        seed_total = float(np.min(
            dist[targets] + np.linalg.norm(graph.pos[targets] - pb, axis=1)))
        final = mb.path_details(a, b).length
        assert final <= seed_total + 1e-12


def test_hinge_unfolding_is_isometric(ico3_backend, rng):
    mesh = ico3_backend.mesh
    for _ in range(100):
        e = int(rng.integers(0, mesh.ne))
        f0, f1 = mesh.edge_f[e]
        if f1 < 0:
            continue
        bary = rng.dirichlet(np.ones(3))
        P = bary @ mesh.V[mesh.F[f0]]
        bary = rng.dirichlet(np.ones(3))
        Q = bary @ mesh.V[mesh.F[f1]]
        ok, ln, xP, yP, xQ, yQ = K._hinge_coords(e, P, Q, mesh.V, mesh.edge_v)
        assert ok
        v0, v1 = mesh.edge_v[e]
        assert abs(ln - np.linalg.norm(mesh.V[v1] - mesh.V[v0])) < 1e-9
        assert abs(np.hypot(xP, yP) - np.linalg.norm(P - mesh.V[v0])) < 1e-9
        assert abs(np.hypot(xP - ln, yP)
                   - np.linalg.norm(P - mesh.V[v1])) < 1e-9
        assert abs(np.hypot(xQ, yQ) - np.linalg.norm(Q - mesh.V[v0])) < 1e-9


def test_icosphere_agrees_with_round_sphere(ico3_backend, sphere, rng):
    errs = []
    for _ in range(200):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        v = u + 0.2 * rng.normal(size=3)
        v /= np.linalg.norm(v)
        ds = sphere.pair_distance(u, v)
        if ds < 5e-2 or ds > 0.5 * ico3_backend.epsilon:
            continue
        a = ico3_backend.closest_point(u)
        b = ico3_backend.closest_point(v)
        dm = ico3_backend.pair_distance(a.coords, b.coords)
        errs.append(abs(dm - ds) / ds)
    assert len(errs) > 100
    assert max(errs) < 0.02


def test_icosphere_polar_angle_distance():
    mb = MeshBackend(TriMesh(*meshgen.icosphere(3)), epsilon=2.0)
    r_mean = float(np.mean(np.linalg.norm(mb.mesh.V, axis=1)))
    a = mb.closest_point([0.0, 0.0, 1.0])
    b = mb.closest_point([1.0, 0.0, 0.0])
    d = mesh_distance(mb, a, b)
    assert abs(d - (np.pi / 2) * r_mean) / ((np.pi / 2) * r_mean) < 0.01


def test_distance_symmetry_below_uniqueness_radius(rng):
    # below the estimated radius the route is unambiguous, so the two-phase
    # asymmetry is bounded by the straightening tolerance
    mb = MeshBackend(TriMesh(*meshgen.icosphere(3)))  # estimated epsilon
    worst = 0.0
    count = 0
    while count < 200:
        a = random_point(mb, rng)
        b = nearby_point(mb, a, mb.epsilon * rng.uniform(0.2, 0.95), rng)
        try:
            dab = mesh_distance(mb, a, b)
            dba = mesh_distance(mb, b, a)
        except TooFar:
            continue
        worst = max(worst, abs(dab - dba))
        count += 1
    assert worst < 1e-7


def test_local_metric_axioms(ico2_backend, rng):
    mb = ico2_backend
    for _ in range(100):
        center = random_point(mb, rng)
        pts = [nearby_point(mb, center, mb.epsilon * 0.3 * rng.uniform(),
                            rng) for _ in range(3)]
        try:
            dab = mesh_distance(mb, pts[0], pts[1])
            dbc = mesh_distance(mb, pts[1], pts[2])
            dac = mesh_distance(mb, pts[0], pts[2])
        except TooFar:
            continue
        assert dac <= dab + dbc + 1e-7
        assert dab >= 0.0


def test_steiner_graph_invariants(cube_backend, ico2_backend):
    for mb in (cube_backend, ico2_backend):
        g = mb.graph
        assert np.all(g.weights > 0.0)
        # connected whenever the mesh is
        seen = np.zeros(g.n_nodes, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for k in range(g.indptr[u], g.indptr[u + 1]):
                v = int(g.indices[k])
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        assert seen.all()
        assert g.face_nodes.shape == (mb.mesh.nf, 3 + 3 * g.s)


def test_mesh_backend_epsilon_must_be_positive(cube_mesh):
    with pytest.raises(ValueError):
        MeshBackend(cube_mesh, epsilon=0.0)


# ---------------------------------------------------------------------------
# epsilon heuristic
# ---------------------------------------------------------------------------

def _brute_force_girth(mesh, graph, v):
    """Exhaustive shortest one-node-per-spoke loop around vertex v."""
    lo, hi = mesh.ve_indptr[v], mesh.ve_indptr[v + 1]
    spokes = mesh.ve_edges[lo:hi - 1]
    cands = []
    for e in spokes:
        nodes = [mesh.nv + e * graph.s + j for j in range(graph.s)]
        far = int(mesh.edge_v[e, 1] if mesh.edge_v[e, 0] == v
                  else mesh.edge_v[e, 0])
        cands.append([graph.pos[n] for n in nodes] + [mesh.V[far]])
    best = np.inf
    for combo in itertools.product(*[range(len(c)) for c in cands]):
        total = 0.0
        for i in range(len(spokes)):
            x = cands[i][combo[i]]
            y = cands[(i + 1) % len(spokes)][combo[(i + 1) % len(spokes)]]
            total += float(np.linalg.norm(x - y))
        best = min(best, total)
    return best


def test_cube_epsilon_against_brute_force(cube_backend):
    mesh = cube_backend.mesh
    graph = cube_backend.graph
    s_factor = 4.0 / 5.0
    girth = min(_brute_force_girth(mesh, graph, v) for v in range(mesh.nv))
    expected = min(0.5 * float(mesh.edge_lengths.min()) * s_factor,
                   0.25 * girth)
    got = epsilon_estimate(mesh)
    assert abs(got - expected) < 1e-12
    assert 0.0 < got <= 0.5


def test_flat_patch_epsilon_edge_term_only(patch_backend):
    # no interior singular vertices: only the edge term is active
    s_factor = 4.0 / 5.0
    assert abs(patch_backend.epsilon_estimated - 0.5 * 0.1 * s_factor) < 1e-12


def test_epsilon_override_passthrough(cube_mesh):
    mb = MeshBackend(cube_mesh, epsilon=0.2)
    assert mb.epsilon == 0.2
    assert mb.epsilon_estimated != 0.2
