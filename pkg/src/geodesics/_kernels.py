"""Hot numeric kernels for the triangulated-surface backend.

Every kernel is written as a plain loop over ndarrays so it can run either
JIT-compiled by numba or interpreted as ordinary numpy code.  Compilation is
controlled by the ``GEODESICS_NO_NUMBA`` environment variable: set it to
``1`` (or ``true``) to force the interpreted fallback.  Results are identical
on both paths; only speed differs (see ``benchmarks/bench_kernels.py``).

Anchor encoding used by the straightening kernel: a path between two face
points is a sequence of crossings, each either on an edge (kind 0, index =
edge id, ``t`` = fraction from the edge's first vertex) or pinned at a vertex
(kind 1, index = vertex id).  Endpoints are handled as pseudo-anchors of
kind 2 whose index is the containing face.
"""

import os

import numpy as np

_env = os.environ.get("GEODESICS_NO_NUMBA", "").strip().lower()
_DISABLED = _env in ("1", "true", "yes", "on")

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and not _DISABLED

if NUMBA_ENABLED:
    def jit(func):
        return _njit(cache=True)(func)
else:
    def jit(func):
        return func

# Straightening status codes.
STATUS_CONVERGED = 0
STATUS_NO_CONVERGENCE = 1
STATUS_CAPACITY = 2
STATUS_INTERNAL = 3

T_CLAMP = 1e-9  # crossing fractions are kept strictly inside (0, 1)


# ---------------------------------------------------------------------------
# Dijkstra over the Steiner graph (CSR layout)
# ---------------------------------------------------------------------------

@jit
def dijkstra_csr(indptr, indices, weights, seeds, seed_dists, targets, cap):
    """Multi-seed Dijkstra with early exit once every target is settled.

    Returns (dist, pred); unreached nodes keep dist = inf, pred = -1.
    Search stops beyond graph distance ``cap``.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, np.int64)
    settled = np.zeros(n, np.uint8)
    is_target = np.zeros(n, np.uint8)
    remaining = 0
    for j in range(targets.shape[0]):
        t = targets[j]
        if is_target[t] == 0:
            is_target[t] = 1
            remaining += 1

    heap_cap = indices.shape[0] + seeds.shape[0] + 1
    heap_d = np.empty(heap_cap)
    heap_n = np.empty(heap_cap, np.int64)
    size = 0

    for j in range(seeds.shape[0]):
        u = seeds[j]
        d = seed_dists[j]
        if d < dist[u]:
            dist[u] = d
            # sift up
            heap_d[size] = d
            heap_n[size] = u
            i = size
            size += 1
            while i > 0:
                p = (i - 1) // 2
                if heap_d[p] <= heap_d[i]:
                    break
                heap_d[p], heap_d[i] = heap_d[i], heap_d[p]
                heap_n[p], heap_n[i] = heap_n[i], heap_n[p]
                i = p

    while size > 0:
        d = heap_d[0]
        u = heap_n[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_n[0] = heap_n[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            m = i
            if l < size and heap_d[l] < heap_d[m]:
                m = l
            if r < size and heap_d[r] < heap_d[m]:
                m = r
            if m == i:
                break
            heap_d[m], heap_d[i] = heap_d[i], heap_d[m]
            heap_n[m], heap_n[i] = heap_n[i], heap_n[m]
            i = m

        if settled[u] == 1:
            continue
        if d > cap:
            break
        settled[u] = 1
        if is_target[u] == 1:
            remaining -= 1
            if remaining == 0:
                break
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if settled[v] == 1:
                continue
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heap_d[size] = nd
                heap_n[size] = v
                i = size
                size += 1
                while i > 0:
                    p = (i - 1) // 2
                    if heap_d[p] <= heap_d[i]:
                        break
                    heap_d[p], heap_d[i] = heap_d[i], heap_d[p]
                    heap_n[p], heap_n[i] = heap_n[i], heap_n[p]
                    i = p
    return dist, pred


# ---------------------------------------------------------------------------
# Closest point on the mesh (Ericson's region test per triangle)
# ---------------------------------------------------------------------------

@jit
def closest_point_on_mesh(V, F, p):
    """Return (face, b0, b1, b2, distance) of the surface point nearest p."""
    best = np.inf
    bf = -1
    bb0 = 0.0
    bb1 = 0.0
    bb2 = 0.0
    for f in range(F.shape[0]):
        ax, ay, az = V[F[f, 0], 0], V[F[f, 0], 1], V[F[f, 0], 2]
        bx, by, bz = V[F[f, 1], 0], V[F[f, 1], 1], V[F[f, 1], 2]
        cx, cy, cz = V[F[f, 2], 0], V[F[f, 2], 1], V[F[f, 2], 2]
        abx, aby, abz = bx - ax, by - ay, bz - az
        acx, acy, acz = cx - ax, cy - ay, cz - az
        apx, apy, apz = p[0] - ax, p[1] - ay, p[2] - az
        d1 = abx * apx + aby * apy + abz * apz
        d2 = acx * apx + acy * apy + acz * apz
        u = 1.0
        v = 0.0
        w = 0.0
        done = False
        if d1 <= 0.0 and d2 <= 0.0:
            done = True  # vertex a
        if not done:
            bpx, bpy, bpz = p[0] - bx, p[1] - by, p[2] - bz
            d3 = abx * bpx + aby * bpy + abz * bpz
            d4 = acx * bpx + acy * bpy + acz * bpz
            if d3 >= 0.0 and d4 <= d3:
                u, v, w = 0.0, 1.0, 0.0
                done = True  # vertex b
        if not done:
            vc = d1 * d4 - d3 * d2
            if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
                t = d1 / (d1 - d3)
                u, v, w = 1.0 - t, t, 0.0
                done = True  # edge ab
        if not done:
            cpx, cpy, cpz = p[0] - cx, p[1] - cy, p[2] - cz
            d5 = abx * cpx + aby * cpy + abz * cpz
            d6 = acx * cpx + acy * cpy + acz * cpz
            if d6 >= 0.0 and d5 <= d6:
                u, v, w = 0.0, 0.0, 1.0
                done = True  # vertex c
            if not done:
                vb = d5 * d2 - d1 * d6
                if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
                    t = d2 / (d2 - d6)
                    u, v, w = 1.0 - t, 0.0, t
                    done = True  # edge ac
            if not done:
                va = d3 * d6 - d5 * d4
                if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
                    t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
                    u, v, w = 0.0, 1.0 - t, t
                    done = True  # edge bc
            if not done:
                denom = 1.0 / (va + vb + vc)
                v = vb * denom
                w = vc * denom
                u = 1.0 - v - w
        qx = u * ax + v * bx + w * cx
        qy = u * ay + v * by + w * cy
        qz = u * az + v * bz + w * cz
        dd = (p[0] - qx) ** 2 + (p[1] - qy) ** 2 + (p[2] - qz) ** 2
        if dd < best:
            best = dd
            bf = f
            bb0, bb1, bb2 = u, v, w
    return bf, bb0, bb1, bb2, np.sqrt(best)


# ---------------------------------------------------------------------------
# Anchor helpers shared by the straightening kernel
# ---------------------------------------------------------------------------

@jit
def _anchor_in_face(kind, idx, t, f, F, face_edge):
    if kind == 2:
        return idx == f
    if kind == 0:
        return (
            face_edge[f, 0] == idx
            or face_edge[f, 1] == idx
            or face_edge[f, 2] == idx
        )
    return F[f, 0] == idx or F[f, 1] == idx or F[f, 2] == idx


@jit
def _common_face(kA, iA, kB, iB, F, face_edge, edge_f, vf_indptr, vf_faces):
    # enumerate the side with fewer candidate faces
    if (kA == 1 and kB != 1) or (kA == 0 and kB == 2):
        kA, iA, kB, iB = kB, iB, kA, iA
    if kA == 2:
        if _anchor_in_face(kB, iB, 0.0, iA, F, face_edge):
            return iA
        return -1
    if kA == 0:
        for s in range(2):
            f = edge_f[iA, s]
            if f >= 0 and _anchor_in_face(kB, iB, 0.0, f, F, face_edge):
                return f
        return -1
    for pidx in range(vf_indptr[iA], vf_indptr[iA + 1]):
        f = vf_faces[pidx]
        if _anchor_in_face(kB, iB, 0.0, f, F, face_edge):
            return f
    return -1


@jit
def _anchor_pos(kind, idx, t, V, edge_v, pa, pb):
    out = np.empty(3)
    if kind == 0:
        v0 = edge_v[idx, 0]
        v1 = edge_v[idx, 1]
        for c in range(3):
            out[c] = (1.0 - t) * V[v0, c] + t * V[v1, c]
    elif kind == 1:
        for c in range(3):
            out[c] = V[idx, c]
    elif kind == 3:
        for c in range(3):
            out[c] = pa[c]
    else:
        for c in range(3):
            out[c] = pb[c]
    return out


@jit
def _angle3(ux, uy, uz, wx, wy, wz):
    nu = np.sqrt(ux * ux + uy * uy + uz * uz)
    nw = np.sqrt(wx * wx + wy * wy + wz * wz)
    if nu < 1e-300 or nw < 1e-300:
        return 0.0
    c = (ux * wx + uy * wy + uz * wz) / (nu * nw)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return np.arccos(c)


@jit
def _angle_at_vertex(v, P, other, V):
    """Angle at vertex v between direction to P and direction to vertex `other`."""
    return _angle3(
        P[0] - V[v, 0], P[1] - V[v, 1], P[2] - V[v, 2],
        V[other, 0] - V[v, 0], V[other, 1] - V[v, 1], V[other, 2] - V[v, 2],
    )


@jit
def _edge_other_vertex(e, v, edge_v):
    if edge_v[e, 0] == v:
        return edge_v[e, 1]
    return edge_v[e, 0]


@jit
def _hinge_coords(e, P, Q, V, edge_v):
    """Unfold the two faces hinged at edge e into a plane.

    Returns (ok, length, xP, yP, xQ, yQ) with P on the y<=0 side and Q on
    the y>=0 side; the unfolding is intrinsic (edge lengths preserved).
    Heights come from the perpendicular component directly, which stays
    accurate even for points (almost) on the edge line.
    """
    v0 = edge_v[e, 0]
    v1 = edge_v[e, 1]
    ex = V[v1, 0] - V[v0, 0]
    ey = V[v1, 1] - V[v0, 1]
    ez = V[v1, 2] - V[v0, 2]
    ln = np.sqrt(ex * ex + ey * ey + ez * ez)
    if ln < 1e-300:
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    ux = ex / ln
    uy = ey / ln
    uz = ez / ln
    px = P[0] - V[v0, 0]
    py = P[1] - V[v0, 1]
    pz = P[2] - V[v0, 2]
    qx = Q[0] - V[v0, 0]
    qy = Q[1] - V[v0, 1]
    qz = Q[2] - V[v0, 2]
    xP = px * ux + py * uy + pz * uz
    xQ = qx * ux + qy * uy + qz * uz
    rx = px - xP * ux
    ry = py - xP * uy
    rz = pz - xP * uz
    yP = -np.sqrt(rx * rx + ry * ry + rz * rz)
    rx = qx - xQ * ux
    ry = qy - xQ * uy
    rz = qz - xQ * uz
    yQ = np.sqrt(rx * rx + ry * ry + rz * rz)
    return True, ln, xP, yP, xQ, yQ


@jit
def _fan_positions(v, f_in, f_out, vf_indptr, vf_faces):
    """Locate f_in and f_out inside the ordered face fan of vertex v."""
    lo = vf_indptr[v]
    hi = vf_indptr[v + 1]
    pos_in = -1
    pos_out = -1
    for j in range(lo, hi):
        if vf_faces[j] == f_in:
            pos_in = j - lo
        if vf_faces[j] == f_out:
            pos_out = j - lo
    return pos_in, pos_out, hi - lo


@jit
def _wedge_angle(v, pos_in, pos_out, deg, forward, P, Q,
                 V, edge_v, corner_at_v, vf_indptr, vf_faces, ve_indptr,
                 ve_edges, vboundary):
    """Total unfolded angle at v from direction v->P to v->Q across one side.

    `forward` walks the fan in +index direction, else -index.  Returns inf
    when the walk would cross a boundary end of the fan.
    """
    lo = vf_indptr[v]
    elo = ve_indptr[v]
    if forward:
        steps = pos_out - pos_in
        if steps < 0:
            steps += deg
        if vboundary[v] == 1 and pos_out < pos_in:
            return np.inf
        first_edge = ve_edges[elo + pos_in + 1]
        last_edge = ve_edges[elo + pos_out]
    else:
        steps = pos_in - pos_out
        if steps < 0:
            steps += deg
        if vboundary[v] == 1 and pos_out > pos_in:
            return np.inf
        first_edge = ve_edges[elo + pos_in]
        last_edge = ve_edges[elo + pos_out + 1]
    total = _angle_at_vertex(v, P, _edge_other_vertex(first_edge, v, edge_v), V)
    j = pos_in
    for _ in range(steps - 1):
        if forward:
            j += 1
            if j >= deg:
                j -= deg
        else:
            j -= 1
            if j < 0:
                j += deg
        total += corner_at_v[lo + j]
    total += _angle_at_vertex(v, Q, _edge_other_vertex(last_edge, v, edge_v), V)
    return total


# ---------------------------------------------------------------------------
# Path straightening by strip unfolding
# ---------------------------------------------------------------------------

@jit
def _strip_relax(a_idx, a_t, i, j, P, Q, V, edge_v, len_floor):
    """Unfold the triangle strip crossed by edge anchors i..j-1 into the
    plane and replace the path by the straight chord.

    Crossing fractions are rewritten in place when the chord stays inside
    the strip and clear of the edge endpoints by `len_floor`; crossings
    that close to a vertex are handed to the vertex machinery instead.
    Returns (status, pivot_slot, pivot_vertex): status 0 means accepted,
    1 means the chord leaves the strip at `pivot_slot` around
    `pivot_vertex`, 2 means inconsistent strip data.
    """
    T = j - i
    A2 = np.empty((T, 2))
    B2 = np.empty((T, 2))

    e0 = a_idx[i]
    okP, l0, xP, yP, _, _ = _hinge_coords(e0, P, P, V, edge_v)
    if not okP:
        return 2, 0, 0
    A2[0, 0] = 0.0
    A2[0, 1] = 0.0
    B2[0, 0] = l0
    B2[0, 1] = 0.0
    Px = xP
    Py = yP
    refx, refy = Px, Py

    for l in range(1, T):
        ep = a_idx[i + l - 1]
        ec = a_idx[i + l]
        # shared vertex of consecutive crossed edges
        if edge_v[ec, 0] == edge_v[ep, 0] or edge_v[ec, 0] == edge_v[ep, 1]:
            s = edge_v[ec, 0]
            w = edge_v[ec, 1]
        elif edge_v[ec, 1] == edge_v[ep, 0] or edge_v[ec, 1] == edge_v[ep, 1]:
            s = edge_v[ec, 1]
            w = edge_v[ec, 0]
        else:
            return 2, 0, 0
        pa2x, pa2y = A2[l - 1, 0], A2[l - 1, 1]
        pb2x, pb2y = B2[l - 1, 0], B2[l - 1, 1]
        vpa = edge_v[ep, 0]
        vpb = edge_v[ep, 1]
        lp = np.sqrt((V[vpb, 0] - V[vpa, 0]) ** 2
                     + (V[vpb, 1] - V[vpa, 1]) ** 2
                     + (V[vpb, 2] - V[vpa, 2]) ** 2)
        u3x = (V[vpb, 0] - V[vpa, 0]) / lp
        u3y = (V[vpb, 1] - V[vpa, 1]) / lp
        u3z = (V[vpb, 2] - V[vpa, 2]) / lp
        wx3 = V[w, 0] - V[vpa, 0]
        wy3 = V[w, 1] - V[vpa, 1]
        wz3 = V[w, 2] - V[vpa, 2]
        xi = wx3 * u3x + wy3 * u3y + wz3 * u3z
        rx = wx3 - xi * u3x
        ry = wy3 - xi * u3y
        rz = wz3 - xi * u3z
        eta = np.sqrt(rx * rx + ry * ry + rz * rz)
        ux = (pb2x - pa2x) / lp
        uy = (pb2y - pa2y) / lp
        # place w on the side of the previous edge away from the unfolded strip
        side = (pb2x - pa2x) * (refy - pa2y) - (pb2y - pa2y) * (refx - pa2x)
        sgn = -1.0 if side > 0.0 else 1.0
        wx = pa2x + xi * ux - sgn * eta * uy
        wy = pa2y + xi * uy + sgn * eta * ux
        s2x = pa2x if vpa == s else pb2x
        s2y = pa2y if vpa == s else pb2y
        o2x = pb2x if vpa == s else pa2x
        o2y = pb2y if vpa == s else pa2y
        if edge_v[ec, 0] == s:
            A2[l, 0], A2[l, 1] = s2x, s2y
            B2[l, 0], B2[l, 1] = wx, wy
        else:
            A2[l, 0], A2[l, 1] = wx, wy
            B2[l, 0], B2[l, 1] = s2x, s2y
        refx, refy = o2x, o2y

    # place Q relative to the last crossed edge
    eT = a_idx[j - 1]
    okQ, lT, xi, etaQ, _, _ = _hinge_coords(eT, Q, Q, V, edge_v)
    if not okQ:
        return 2, 0, 0
    eta = -etaQ  # hinge helper reports the first point on the y<=0 side
    ux = (B2[T - 1, 0] - A2[T - 1, 0]) / lT
    uy = (B2[T - 1, 1] - A2[T - 1, 1]) / lT
    side = ((B2[T - 1, 0] - A2[T - 1, 0]) * (refy - A2[T - 1, 1])
            - (B2[T - 1, 1] - A2[T - 1, 1]) * (refx - A2[T - 1, 0]))
    sgn = -1.0 if side > 0.0 else 1.0
    Qx = A2[T - 1, 0] + xi * ux - sgn * eta * uy
    Qy = A2[T - 1, 1] + xi * uy + sgn * eta * ux

    dx = Qx - Px
    dy = Qy - Py
    dlen = np.sqrt(dx * dx + dy * dy)
    uprev = -1.0
    for l in range(T):
        ex = B2[l, 0] - A2[l, 0]
        ey = B2[l, 1] - A2[l, 1]
        eln = np.sqrt(ex * ex + ey * ey)
        den = ex * dy - ey * dx
        e = a_idx[i + l]
        if abs(den) <= 1e-9 * eln * dlen:
            # chord (anti)parallel to the crossed edge: when it runs along
            # the edge line, keep the crossing between the endpoints;
            # otherwise the path must leave around an edge endpoint
            offs = abs((A2[l, 0] - Px) * dy - (A2[l, 1] - Py) * dx) \
                / dlen if dlen > 1e-300 else np.inf
            if offs <= len_floor:
                smid = (((Px + Qx) * 0.5 - A2[l, 0]) * ex
                        + ((Py + Qy) * 0.5 - A2[l, 1]) * ey) / (eln * eln)
                lo = len_floor / eln
                if lo > 0.4:
                    lo = 0.4
                if smid < lo:
                    smid = lo
                elif smid > 1.0 - lo:
                    smid = 1.0 - lo
                a_t[i + l] = smid
                continue
            return 1, l, edge_v[e, 0]
        snew = ((Px - A2[l, 0]) * dy - (Py - A2[l, 1]) * dx) / den
        denu = dx * ey - dy * ex
        unew = ((A2[l, 0] - Px) * ey - (A2[l, 1] - Py) * ex) / denu
        e = a_idx[i + l]
        if snew * eln <= len_floor:
            return 1, l, edge_v[e, 0]
        if (1.0 - snew) * eln <= len_floor:
            return 1, l, edge_v[e, 1]
        if unew < uprev - 1e-12 or unew < -1e-12 or unew > 1.0 + 1e-12:
            v = edge_v[e, 0] if snew < 0.5 else edge_v[e, 1]
            return 1, l, v
        uprev = unew
        a_t[i + l] = snew
    return 0, 0, 0


@jit
def _cleanup(a_kind, a_idx, a_t, n, fa, fb, V, F, face_edge, edge_v, edge_f,
             vf_indptr, vf_faces, len_floor):
    """Normalize near-vertex crossings into vertex anchors and drop
    duplicate or redundant anchors.  Returns (new count, changed)."""
    changed = False
    i = 0
    while i < n:
        if a_kind[i] == 0:
            e = a_idx[i]
            va = edge_v[e, 0]
            vb = edge_v[e, 1]
            eln = np.sqrt((V[vb, 0] - V[va, 0]) ** 2
                          + (V[vb, 1] - V[va, 1]) ** 2
                          + (V[vb, 2] - V[va, 2]) ** 2)
            if a_t[i] * eln < len_floor:
                a_kind[i] = 1
                a_idx[i] = va
                a_t[i] = 0.0
                changed = True
            elif (1.0 - a_t[i]) * eln < len_floor:
                a_kind[i] = 1
                a_idx[i] = vb
                a_t[i] = 0.0
                changed = True
        if i > 0 and a_kind[i] == a_kind[i - 1] \
                and a_idx[i] == a_idx[i - 1]:
            # repeated vertex, or two crossings of one edge in a row
            for j in range(i, n - 1):
                a_kind[j] = a_kind[j + 1]
                a_idx[j] = a_idx[j + 1]
                a_t[j] = a_t[j + 1]
            n -= 1
            changed = True
            continue
        if i == 0:
            kP, iP = 3, fa
        else:
            kP, iP = a_kind[i - 1], a_idx[i - 1]
        if i == n - 1:
            kN, iN = 4, fb
        else:
            kN, iN = a_kind[i + 1], a_idx[i + 1]
        kPc = 2 if kP >= 2 else kP
        kNc = 2 if kN >= 2 else kN
        if _common_face(kPc, iP, kNc, iN, F, face_edge, edge_f,
                        vf_indptr, vf_faces) >= 0:
            for j in range(i, n - 1):
                a_kind[j] = a_kind[j + 1]
                a_idx[j] = a_idx[j + 1]
                a_t[j] = a_t[j + 1]
            n -= 1
            changed = True
            continue
        i += 1
    return n, changed


@jit
def straighten_path(a_kind, a_idx, a_t, n0, fa, pa, fb, pb,
                    V, F, face_edge, edge_v, edge_f, cone,
                    vf_indptr, vf_faces, ve_indptr, ve_edges, corner_at_v,
                    vboundary, tol, max_pass, len_floor, pin_slack):
    """Relax a crossing sequence until it unfolds straight everywhere.

    Each pass drops redundant anchors, replaces every maximal edge-crossing
    strip by its unfolded chord (pivoting onto a vertex when the chord
    leaves the strip), and routes paths off vertices whose smaller wedge
    angle is below pi.  Bend checks are skipped on segments shorter than
    `len_floor`, below which angles drown in fp cancellation noise.
    Works in place on the anchor arrays (capacity beyond n0 must be free).
    Returns (status, n, passes, max_defect, ambiguity_count).
    """
    n = n0
    cap = a_kind.shape[0]
    ambiguity = 0
    max_defect = 0.0

    for p_iter in range(max_pass):
        n, changed = _cleanup(a_kind, a_idx, a_t, n, fa, fb, V, F,
                              face_edge, edge_v, edge_f, vf_indptr, vf_faces,
                              len_floor)

        # --- relax sweep ----------------------------------------------------
        i = 0
        while i < n:
            if i == 0:
                kP, iP, tP = 3, fa, 0.0
            else:
                kP, iP, tP = a_kind[i - 1], a_idx[i - 1], a_t[i - 1]
            P = _anchor_pos(kP, iP, tP, V, edge_v, pa, pb)
            kPc = 2 if kP >= 2 else kP

            if a_kind[i] == 0:
                j = i
                while j < n and a_kind[j] == 0:
                    j += 1
                if j == n:
                    kN, iN, tN = 4, fb, 0.0
                else:
                    kN, iN, tN = a_kind[j], a_idx[j], a_t[j]
                Q = _anchor_pos(kN, iN, tN, V, edge_v, pa, pb)
                t_before = 0.0
                for q in range(i, j):
                    t_before += a_t[q]
                st, slot, vtx = _strip_relax(a_idx, a_t, i, j, P, Q, V,
                                             edge_v, len_floor)
                if st == 0:
                    t_after = 0.0
                    for q in range(i, j):
                        t_after += a_t[q]
                    if abs(t_after - t_before) > 1e-15:
                        changed = True
                if st == 2:
                    return STATUS_INTERNAL, n, p_iter, max_defect, ambiguity
                if st == 1:
                    pos = i + slot
                    drop = False
                    if pos > 0 and a_kind[pos - 1] == 1 \
                            and a_idx[pos - 1] == vtx:
                        drop = True
                    if pos < n - 1 and a_kind[pos + 1] == 1 \
                            and a_idx[pos + 1] == vtx:
                        drop = True
                    changed = True
                    if drop:
                        for q in range(pos, n - 1):
                            a_kind[q] = a_kind[q + 1]
                            a_idx[q] = a_idx[q + 1]
                            a_t[q] = a_t[q + 1]
                        n -= 1
                    else:
                        a_kind[pos] = 1
                        a_idx[pos] = vtx
                        a_t[pos] = 0.0
                i = j
                continue
            else:
                if i == n - 1:
                    kN, iN, tN = 4, fb, 0.0
                else:
                    kN, iN, tN = a_kind[i + 1], a_idx[i + 1], a_t[i + 1]
                Q = _anchor_pos(kN, iN, tN, V, edge_v, pa, pb)
                kNc = 2 if kN >= 2 else kN
                v = a_idx[i]
                dPv = np.sqrt((P[0] - V[v, 0]) ** 2 + (P[1] - V[v, 1]) ** 2
                              + (P[2] - V[v, 2]) ** 2)
                dQv = np.sqrt((Q[0] - V[v, 0]) ** 2 + (Q[1] - V[v, 1]) ** 2
                              + (Q[2] - V[v, 2]) ** 2)
                lo = dPv if dPv < dQv else dQv
                if lo < len_floor:
                    i += 1  # neighbor sits (nearly) on the vertex
                    continue
                f_in = _common_face(kPc, iP, 1, v, F, face_edge, edge_f,
                                    vf_indptr, vf_faces)
                f_out = _common_face(1, v, kNc, iN, F, face_edge, edge_f,
                                     vf_indptr, vf_faces)
                if f_in < 0 or f_out < 0:
                    return STATUS_INTERNAL, n, p_iter, max_defect, ambiguity
                if f_in == f_out:
                    for j in range(i, n - 1):
                        a_kind[j] = a_kind[j + 1]
                        a_idx[j] = a_idx[j + 1]
                        a_t[j] = a_t[j + 1]
                    n -= 1
                    changed = True
                    continue
                pos_in, pos_out, deg = _fan_positions(v, f_in, f_out,
                                                      vf_indptr, vf_faces)
                if pos_in < 0 or pos_out < 0:
                    return STATUS_INTERNAL, n, p_iter, max_defect, ambiguity
                th_p = _wedge_angle(v, pos_in, pos_out, deg, True, P, Q,
                                    V, edge_v, corner_at_v, vf_indptr,
                                    vf_faces, ve_indptr, ve_edges, vboundary)
                th_m = _wedge_angle(v, pos_in, pos_out, deg, False, P, Q,
                                    V, edge_v, corner_at_v, vf_indptr,
                                    vf_faces, ve_indptr, ve_edges, vboundary)
                if th_p == np.inf and th_m == np.inf:
                    i += 1
                    continue
                if abs(th_p - th_m) <= 1e-9 and th_p != np.inf:
                    ambiguity += 1
                if th_p < th_m:
                    forward = True
                    theta = th_p
                elif th_m < th_p:
                    forward = False
                    theta = th_m
                else:
                    # exact tie: lower far-vertex index of the first crossed edge
                    elo = ve_indptr[v]
                    ef = ve_edges[elo + pos_in + 1]
                    eb = ve_edges[elo + pos_in]
                    wf = _edge_other_vertex(ef, v, edge_v)
                    wb = _edge_other_vertex(eb, v, edge_v)
                    forward = wf <= wb
                    theta = th_p if forward else th_m
                if theta >= np.pi - tol:
                    i += 1  # locally straight through the vertex
                    continue
                # knife-edge gate: keep the pin when cutting the corner in
                # the development would save less than the resolution floor.
                # At singular vertices the two sides can tie within pin_slack
                # and route choices would flip on tiny input changes, so
                # those pins get the wider hysteresis band.
                chord2 = dPv * dPv + dQv * dQv \
                    - 2.0 * dPv * dQv * np.cos(theta)
                saving = dPv + dQv - np.sqrt(max(chord2, 0.0))
                lo_seg = dPv if dPv < dQv else dQv
                if lo_seg < len_floor:
                    lo_seg = len_floor
                band = 4.0 * len_floor * len_floor / lo_seg
                if cone[v] < 2.0 * np.pi - 1e-9 and pin_slack > band:
                    band = pin_slack
                if saving <= band:
                    i += 1
                    continue
                # push the path off the vertex across the chosen fan
                if forward:
                    steps = pos_out - pos_in
                    if steps < 0:
                        steps += deg
                else:
                    steps = pos_in - pos_out
                    if steps < 0:
                        steps += deg
                r = steps + 1  # number of fan faces
                extra = r - 2  # anchors added beyond the one replaced
                if n + extra > cap:
                    return STATUS_CAPACITY, n, p_iter, max_defect, ambiguity
                changed = True
                if extra > 0:
                    for j in range(n - 1, i, -1):
                        a_kind[j + extra] = a_kind[j]
                        a_idx[j + extra] = a_idx[j]
                        a_t[j + extra] = a_t[j]
                n += extra
                # unfolded endpoints around v
                dPx = P[0] - V[v, 0]
                dPy = P[1] - V[v, 1]
                dPz = P[2] - V[v, 2]
                dQx = Q[0] - V[v, 0]
                dQy = Q[1] - V[v, 1]
                dQz = Q[2] - V[v, 2]
                rP = np.sqrt(dPx * dPx + dPy * dPy + dPz * dPz)
                rQ = np.sqrt(dQx * dQx + dQy * dQy + dQz * dQz)
                Px2, Py2 = rP, 0.0
                Qx2 = rQ * np.cos(theta)
                Qy2 = rQ * np.sin(theta)
                lo = vf_indptr[v]
                elo = ve_indptr[v]
                acc = 0.0
                j = pos_in
                for l in range(1, r):
                    if forward:
                        e_cross = ve_edges[elo + ((pos_in + l - 1) % deg) + 1]
                    else:
                        e_cross = ve_edges[elo + ((pos_in - l + 1) % deg + deg) % deg]
                    if l == 1:
                        acc = _angle_at_vertex(
                            v, P, _edge_other_vertex(e_cross, v, edge_v), V)
                    else:
                        acc += corner_at_v[lo + j]
                    if forward:
                        j += 1
                        if j >= deg:
                            j -= deg
                    else:
                        j -= 1
                        if j < 0:
                            j += deg
                    dx = np.cos(acc)
                    dy = np.sin(acc)
                    denom = dx * (Qy2 - Py2) - dy * (Qx2 - Px2)
                    if abs(denom) < 1e-300:
                        rho = rP
                    else:
                        u = (dy * Px2 - dx * Py2) / denom
                        if u < 0.0:
                            u = 0.0
                        elif u > 1.0:
                            u = 1.0
                        ix = Px2 + u * (Qx2 - Px2)
                        iy = Py2 + u * (Qy2 - Py2)
                        rho = np.sqrt(ix * ix + iy * iy)
                    w = _edge_other_vertex(e_cross, v, edge_v)
                    ex = V[w, 0] - V[v, 0]
                    ey = V[w, 1] - V[v, 1]
                    ez = V[w, 2] - V[v, 2]
                    eln = np.sqrt(ex * ex + ey * ey + ez * ez)
                    tfrac = rho / eln
                    # keep crossings a measurable distance from both edge
                    # endpoints; the next pass pivots if a vertex really
                    # blocks the chord
                    lo_frac = len_floor / eln
                    if lo_frac > 0.4:
                        lo_frac = 0.4
                    if tfrac < lo_frac:
                        tfrac = lo_frac
                    elif tfrac > 1.0 - lo_frac:
                        tfrac = 1.0 - lo_frac
                    if edge_v[e_cross, 0] != v:
                        tfrac = 1.0 - tfrac
                    a_kind[i + l - 1] = 0
                    a_idx[i + l - 1] = e_cross
                    a_t[i + l - 1] = tfrac
                i += r - 1

        # --- defect evaluation on a normalized state --------------------------
        n, changed2 = _cleanup(a_kind, a_idx, a_t, n, fa, fb, V, F,
                               face_edge, edge_v, edge_f, vf_indptr,
                               vf_faces, len_floor)
        changed = changed or changed2
        max_defect = 0.0
        for i in range(n):
            if i == 0:
                kP, iP, tP = 3, fa, 0.0
            else:
                kP, iP, tP = a_kind[i - 1], a_idx[i - 1], a_t[i - 1]
            if i == n - 1:
                kN, iN, tN = 4, fb, 0.0
            else:
                kN, iN, tN = a_kind[i + 1], a_idx[i + 1], a_t[i + 1]
            P = _anchor_pos(kP, iP, tP, V, edge_v, pa, pb)
            Q = _anchor_pos(kN, iN, tN, V, edge_v, pa, pb)
            X = _anchor_pos(a_kind[i], a_idx[i], a_t[i], V, edge_v, pa, pb)
            dP = np.sqrt((P[0] - X[0]) ** 2 + (P[1] - X[1]) ** 2
                         + (P[2] - X[2]) ** 2)
            dQ = np.sqrt((Q[0] - X[0]) ** 2 + (Q[1] - X[1]) ** 2
                         + (Q[2] - X[2]) ** 2)
            lo = dP if dP < dQ else dQ
            if lo < len_floor:
                continue  # segment too short for a measurable bend angle
            if a_kind[i] == 0:
                e = a_idx[i]
                ok, ln, xP, yP, xQ, yQ = _hinge_coords(e, P, Q, V, edge_v)
                if not ok:
                    continue
                xX = a_t[i] * ln
                ang = _angle3(xP - xX, yP, 0.0, xQ - xX, yQ, 0.0)
                defect = np.pi - ang
            else:
                v = a_idx[i]
                kPc = 2 if kP >= 2 else kP
                kNc = 2 if kN >= 2 else kN
                f_in = _common_face(kPc, iP, 1, v, F, face_edge, edge_f,
                                    vf_indptr, vf_faces)
                f_out = _common_face(1, v, kNc, iN, F, face_edge, edge_f,
                                     vf_indptr, vf_faces)
                if f_in < 0 or f_out < 0 or f_in == f_out:
                    continue
                pos_in, pos_out, deg = _fan_positions(v, f_in, f_out,
                                                      vf_indptr, vf_faces)
                th_p = _wedge_angle(v, pos_in, pos_out, deg, True, P, Q,
                                    V, edge_v, corner_at_v, vf_indptr,
                                    vf_faces, ve_indptr, ve_edges, vboundary)
                th_m = _wedge_angle(v, pos_in, pos_out, deg, False, P, Q,
                                    V, edge_v, corner_at_v, vf_indptr,
                                    vf_faces, ve_indptr, ve_edges, vboundary)
                th = th_p if th_p < th_m else th_m
                if th == np.inf:
                    continue
                defect = np.pi - th
                if defect > 0.0:
                    # mirror the knife-edge gate of the relax step
                    chord2 = dP * dP + dQ * dQ - 2.0 * dP * dQ * np.cos(th)
                    saving = dP + dQ - np.sqrt(max(chord2, 0.0))
                    lo_seg = dP if dP < dQ else dQ
                    if lo_seg < len_floor:
                        lo_seg = len_floor
                    band = 4.0 * len_floor * len_floor / lo_seg
                    if cone[v] < 2.0 * np.pi - 1e-9 and pin_slack > band:
                        band = pin_slack
                    if saving <= band:
                        defect = 0.0
            if defect < 0.0:
                defect = 0.0
            if defect > max_defect:
                max_defect = defect
        if max_defect <= tol:
            return STATUS_CONVERGED, n, p_iter + 1, max_defect, ambiguity
        if not changed:
            # fixed point above tolerance; further passes cannot help
            return STATUS_NO_CONVERGENCE, n, p_iter + 1, max_defect, ambiguity

    return STATUS_NO_CONVERGENCE, n, max_pass, max_defect, ambiguity


# ---------------------------------------------------------------------------
# Consecutive-gap distances with same-face / hinge fast paths
# ---------------------------------------------------------------------------

@jit
def gap_distances(faces, pos, V, F, face_edge, edge_f, edge_v, cone,
                  vboundary, closed):
    """Distances between consecutive curve samples where they are cheap.

    A hinge crossing is only trusted when the opening at both edge
    endpoints stays within half their cone angles, since otherwise a route
    around the vertex could be shorter.  Returns (lengths, need_full) where
    need_full marks gaps that require a full two-phase query.
    """
    m = faces.shape[0]
    ng = m if closed else m - 1
    out = np.zeros(ng)
    need = np.zeros(ng, np.uint8)
    for g in range(ng):
        i = g
        j = g + 1
        if j == m:
            j = 0
        fi = faces[i]
        fj = faces[j]
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        dz = pos[j, 2] - pos[i, 2]
        d3 = np.sqrt(dx * dx + dy * dy + dz * dz)
        if d3 < 1e-14 or fi == fj:
            out[g] = d3
            continue
        e = -1
        for s in range(3):
            cand = face_edge[fi, s]
            if (face_edge[fj, 0] == cand or face_edge[fj, 1] == cand
                    or face_edge[fj, 2] == cand):
                e = cand
                break
        if e < 0:
            need[g] = 1
            continue
        ok, ln, xP, yP, xQ, yQ = _hinge_coords(e, pos[i], pos[j], V, edge_v)
        if not ok:
            need[g] = 1
            continue
        if yQ - yP < 1e-300:
            out[g] = d3  # both samples on the hinge edge line
            continue
        tstar = (xP + (xQ - xP) * (-yP) / (yQ - yP)) / ln
        if not 0.0 < tstar < 1.0:
            need[g] = 1
            continue
        exact = True
        for side in range(2):
            v = edge_v[e, side]
            if vboundary[v] == 1:
                continue
            vx = 0.0 if side == 0 else ln
            beta = _angle3(xP - vx, yP, 0.0, xQ - vx, yQ, 0.0)
            if beta > 0.5 * cone[v] + 1e-12:
                exact = False
                break
        if exact:
            ddx = xQ - xP
            ddy = yQ - yP
            out[g] = np.sqrt(ddx * ddx + ddy * ddy)
        else:
            need[g] = 1
    return out, need
