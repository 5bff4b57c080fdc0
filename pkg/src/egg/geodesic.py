"""Geodesic queries on triangle meshes.

Shortest geodesics: Dijkstra edge-path initialization, then iterative
shortening by unfolding the crossed-edge corridor into the plane and
string-pulling (funnel algorithm). Where the in-corridor shortest path
wraps a mesh vertex whose far-side cone angle is below pi, the corridor is
rerouted around that vertex and the pull repeats; this converges to a
locally shortest geodesic. Straightest geodesics are traced by unfolding
the direction across each crossed edge.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .mesh import MeshPoint, TriangleMesh

STRAIGHTNESS_TOL = 1e-6  # rad, per interior point


class GeodesicError(ValueError):
    pass


@dataclass
class GeodesicPath:
    """Polyline of on-mesh points with arc-length bookkeeping.

    ``supports[i]`` tags points as ("face", f) or ("edge", e, t).
    """

    points: np.ndarray              # (k, 3)
    supports: list
    length: float
    residual: float = 0.0           # max unfolding-angle deviation, rad
    truncated: bool = False
    history: list = field(default_factory=list)  # per-iteration lengths

    @property
    def arcs(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])

    def point_at(self, s: float) -> np.ndarray:
        arcs = self.arcs
        s = float(np.clip(s, 0.0, arcs[-1]))
        i = int(np.searchsorted(arcs, s, side="right") - 1)
        i = min(i, len(arcs) - 2)
        seg = arcs[i + 1] - arcs[i]
        t = 0.0 if seg <= 0 else (s - arcs[i]) / seg
        return (1 - t) * self.points[i] + t * self.points[i + 1]

    def tangent_at(self, s: float) -> np.ndarray:
        arcs = self.arcs
        s = float(np.clip(s, 0.0, arcs[-1]))
        i = int(np.searchsorted(arcs, s, side="right") - 1)
        i = min(max(i, 0), len(self.points) - 2)
        d = self.points[i + 1] - self.points[i]
        n = np.linalg.norm(d)
        return d / n if n > 0 else d

    def to_json(self) -> dict:
        return {"points": self.points.tolist(), "length": self.length}


# -- Dijkstra initialization --------------------------------------------


def _vertex_adjacency(mesh: TriangleMesh):
    adj = getattr(mesh, "_vadj", None)
    if adj is None:
        adj = [[] for _ in range(len(mesh.vertices))]
        for e, (a, b) in enumerate(mesh.edges):
            w = mesh.edge_lengths[e]
            adj[a].append((int(b), w))
            adj[b].append((int(a), w))
        mesh._vadj = adj
    return adj


def dijkstra_from(mesh: TriangleMesh, p: MeshPoint):
    """Distances and predecessors from an on-mesh point over the edge graph."""
    adj = _vertex_adjacency(mesh)
    n = len(mesh.vertices)
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    heap = []
    pv = p.vertex_id(mesh)
    if pv is not None:
        dist[pv] = 0.0
        heap.append((0.0, pv))
    else:
        pos = p.position(mesh)
        for v in mesh.faces[p.face]:
            d = float(np.linalg.norm(mesh.vertices[v] - pos))
            dist[v] = d
            heap.append((d, int(v)))
    heapq.heapify(heap)
    done = np.zeros(n, dtype=bool)
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for u, w in adj[v]:
            nd = d + w
            if nd < dist[u]:
                dist[u] = nd
                pred[u] = v
                heapq.heappush(heap, (nd, u))
    return dist, pred


def _vertex_path(mesh: TriangleMesh, dist, pred, q: MeshPoint) -> list[int]:
    qv = q.vertex_id(mesh)
    if qv is not None:
        end = qv
    else:
        pos = q.position(mesh)
        cands = [int(v) for v in mesh.faces[q.face]]
        end = min(cands, key=lambda v: dist[v] + np.linalg.norm(mesh.vertices[v] - pos))
    if not np.isfinite(dist[end]):
        raise GeodesicError("points lie in disconnected mesh components")
    path = [end]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    path.reverse()
    return path


# -- corridor construction ------------------------------------------------


def _fan_route(mesh: TriangleMesh, v: int, f_start: int, stop, avoid_edge=-1):
    """Walk the face fan around ``v`` from ``f_start`` until ``stop(face)``.

    Returns (faces, crossed_edges) for the lower-angle direction, or None.
    ``avoid_edge`` forbids crossing a given edge (rerouting to the far side).
    """
    fan = mesh.vertex_fans[v]
    k = len(fan)
    closed = not mesh.boundary_vertices[v]
    try:
        i0 = fan.index(f_start)
    except ValueError:
        return None
    best = None
    for step in (1, -1):
        faces = [f_start]
        edges = []
        ang = mesh.corner_angle(f_start, v)
        i = i0
        ok = stop(f_start)
        guard = 0
        while not ok and guard <= k:
            guard += 1
            j = i + step
            if closed:
                j %= k
            elif j < 0 or j >= k:
                break
            e = _shared_vertex_edge(mesh, v, fan[i], fan[j])
            if e is None or e == avoid_edge:
                break
            edges.append(e)
            faces.append(fan[j])
            ang += mesh.corner_angle(fan[j], v)
            i = j
            ok = stop(fan[j])
        if ok and (best is None or ang < best[2]):
            best = (faces, edges, ang)
    if best is None:
        return None
    return best[0], best[1]


def _shared_vertex_edge(mesh: TriangleMesh, v: int, fa: int, fb: int):
    """Edge incident to v shared by faces fa and fb, or None."""
    ea = set(mesh.face_edges[fa])
    eb = set(mesh.face_edges[fb])
    for e in ea & eb:
        if v in mesh.edges[e]:
            return int(e)
    return None


def _initial_corridor(mesh: TriangleMesh, p: MeshPoint, q: MeshPoint,
                      vpath: list[int]):
    """Crossed-edge corridor (edges, faces) from a Dijkstra vertex path.

    ``faces`` has one more entry than ``edges``; edges[i] separates
    faces[i] and faces[i+1]; p lies in faces[0] and q in faces[-1].
    """
    pv, qv = p.vertex_id(mesh), q.vertex_id(mesh)
    verts = [v for v in vpath if v != pv and v != qv]

    if not verts:
        if qv is None:
            f = q.face
        elif pv is None:
            f = p.face
        else:
            e = mesh._edge_id(pv, qv)
            f = int(mesh.edge_faces[e, 0])
        return [], [f]

    edges: list[int] = []
    faces: list[int] = []
    if pv is None:
        cur_face = p.face
    else:
        e = mesh._edge_id(pv, verts[0])
        cur_face = int(mesh.edge_faces[e, 0])
    for idx, v in enumerate(verts):
        if idx + 1 < len(verts):
            w = verts[idx + 1]
            stop = lambda f, w=w: w in mesh.faces[f]
        elif qv is not None:
            stop = lambda f, w=qv: w in mesh.faces[f]
        else:
            stop = lambda f, tf=q.face: f == tf
        route = _fan_route(mesh, v, cur_face, stop)
        if route is None:
            raise GeodesicError(f"no fan route around vertex {v}")
        rfaces, redges = route
        faces.extend(rfaces[:-1])
        edges.extend(redges)
        cur_face = rfaces[-1]
    faces.append(cur_face)
    return edges, faces


def _dedupe_corridor(edges, faces):
    """Remove immediate double-crossings of the same edge."""
    i = 0
    while i + 1 < len(edges):
        if edges[i] == edges[i + 1]:
            del edges[i:i + 2]
            del faces[i + 1:i + 3]
            i = max(i - 1, 0)
        else:
            i += 1


# -- corridor unfolding and funnel ----------------------------------------


def _trilaterate(P2, Q2, dp, dq, ref2, opposite=True):
    """2D point at distances dp, dq from P2, Q2, on the chosen side of PQ."""
    d = Q2 - P2
    L = np.linalg.norm(d)
    u = d / L
    w = np.array([-u[1], u[0]])
    x = (dp * dp - dq * dq + L * L) / (2.0 * L)
    y2 = dp * dp - x * x
    y = np.sqrt(y2) if y2 > 0 else 0.0
    side = np.dot(ref2 - P2, w)
    if (side > 0) == opposite:
        y = -y
    return P2 + x * u + y * w


def _unfold_corridor(mesh, a3, b3, edges, faces):
    """Lay the corridor out isometrically in 2D.

    Returns (a2d, b2d, portals) with portals[i] = (p0, p1, v0, v1): 2D
    coordinates of edge i's canonical endpoints.
    """
    n = len(edges)
    pos3 = mesh.vertices
    v0, v1 = (int(x) for x in mesh.edges[edges[0]])
    P0 = np.array([0.0, 0.0])
    P1 = np.array([mesh.edge_lengths[edges[0]], 0.0])
    # third vertex of the first face, placed below the x-axis
    t0 = next(int(v) for v in mesh.faces[faces[0]] if v not in (v0, v1))
    t02 = _trilaterate(P0, P1, np.linalg.norm(pos3[t0] - pos3[v0]),
                       np.linalg.norm(pos3[t0] - pos3[v1]),
                       np.array([0.0, 1.0]), opposite=True)
    a2 = _trilaterate(P0, P1, np.linalg.norm(a3 - pos3[v0]),
                      np.linalg.norm(a3 - pos3[v1]),
                      t02, opposite=False)
    portals = [(P0, P1, v0, v1)]
    cur = {v0: P0, v1: P1}
    ref = t02  # 2D point interior to the face already unfolded
    for i in range(1, n):
        pa, pb = (int(x) for x in mesh.edges[edges[i - 1]])
        ca, cb = (int(x) for x in mesh.edges[edges[i]])
        new = cb if ca in (pa, pb) else ca
        # endpoint of the previous edge that the next edge does not use
        back = pa if pa not in (ca, cb) else pb
        new2 = _trilaterate(cur[pa], cur[pb],
                            np.linalg.norm(pos3[new] - pos3[pa]),
                            np.linalg.norm(pos3[new] - pos3[pb]),
                            ref, opposite=True)
        ref = cur[back]
        cur = {ca if new == cb else cb: cur[ca if new == cb else cb], new: new2}
        portals.append((cur[ca], cur[cb], ca, cb))
    pa, pb = (int(x) for x in mesh.edges[edges[-1]])
    b2 = _trilaterate(cur[pa], cur[pb],
                      np.linalg.norm(b3 - pos3[pa]),
                      np.linalg.norm(b3 - pos3[pb]),
                      ref if n > 1 else t02, opposite=True)
    return a2, b2, portals


def _tri2(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _funnel(a2, sided, b2, eps):
    """Simple stupid funnel over 2D portals.

    ``sided``: list of (L, R, Lv, Rv). Returns list of bends
    (portal_index, vertex_id, point2d) in path order.
    """
    portals = sided + [(b2, b2, -1, -1)]
    apex = a2
    left, right = a2, a2
    left_i = right_i = -1
    left_v = right_v = -1
    bends = []
    i = 0
    while i < len(portals):
        l, r, lv, rv = portals[i]
        # tighten the right funnel edge (rotates counter-clockwise)
        if _tri2(apex, right, r) >= -eps:
            if np.allclose(apex, right) or _tri2(apex, left, r) < eps:
                right, right_i, right_v = r, i, rv
            else:
                # right swept past left: the path bends at the left corner
                bends.append((left_i, left_v, np.array(left)))
                apex = left
                left = right = apex
                i = left_i
                left_i = right_i = i
                left_v = right_v = -1
                i += 1
                continue
        # tighten the left funnel edge (rotates clockwise)
        if _tri2(apex, left, l) <= eps:
            if np.allclose(apex, left) or _tri2(apex, right, l) > -eps:
                left, left_i, left_v = l, i, lv
            else:
                bends.append((right_i, right_v, np.array(right)))
                apex = right
                left = right = apex
                i = right_i
                left_i = right_i = i
                left_v = right_v = -1
                i += 1
                continue
        i += 1
    return bends


def _assign_sides(a2, portals):
    """Orient portals as (left, right) seen along the travel direction."""
    sided = []
    prev_lv = prev_rv = None
    for k, (p0, p1, v0, v1) in enumerate(portals):
        if k == 0:
            if _tri2(a2, p0, p1) > 0:
                sided.append((p1, p0, v1, v0))
            else:
                sided.append((p0, p1, v0, v1))
        else:
            if v0 == prev_lv or v1 == prev_rv:
                sided.append((p0, p1, v0, v1))
            else:
                sided.append((p1, p0, v1, v0))
        prev_lv, prev_rv = sided[-1][2], sided[-1][3]
    return sided


def _cone_angles(mesh):
    cones = getattr(mesh, "_cone_angles", None)
    if cones is None:
        cones = np.zeros(len(mesh.vertices))
        for fi, tri in enumerate(mesh.faces):
            for v in tri:
                cones[int(v)] += mesh.corner_angle(fi, int(v))
        mesh._cone_angles = cones
    return cones


def _chain_length(chain) -> float:
    return float(sum(np.linalg.norm(chain[k + 1] - chain[k])
                     for k in range(len(chain) - 1)))


def _shorten_corridor(mesh, a3, b3, edges, faces, max_iter=200):
    """Iterate funnel + vertex reroutes until locally shortest.

    Returns (edges, faces, ts, residual, history): crossing parameters per
    corridor edge and the straightness residual (rad).
    """
    cones = _cone_angles(mesh)
    history = []
    scale = float(np.max(mesh.edge_lengths))
    eps = 1e-14 * scale * scale
    for _ in range(max_iter):
        _dedupe_corridor(edges, faces)
        if not edges:
            history.append(float(np.linalg.norm(b3 - a3)))
            return edges, faces, [], 0.0, history
        a2, b2, portals = _unfold_corridor(mesh, a3, b3, edges, faces)
        sided = _assign_sides(a2, portals)
        bends = _funnel(a2, sided, b2, eps)
        chain = [a2] + [pt for _, _, pt in bends] + [b2]
        history.append(_chain_length(chain))
        # decide reroutes, last run first so indices stay valid
        residual = 0.0
        reroutes = []
        for k, (pi, v, pt) in enumerate(bends):
            if v < 0:
                continue
            prev_pt = chain[k]
            next_pt = chain[k + 2]
            u = pt - prev_pt
            w = next_pt - pt
            turn = abs(np.arctan2(_tri2((0, 0), u, w), float(np.dot(u, w))))
            theta_cur = np.pi + turn
            if mesh.boundary_vertices[v]:
                continue  # path constrained by an open fan: accept the bend
            theta_other = cones[v] - theta_cur
            if theta_other < np.pi - 1e-12:
                reroutes.append((pi, v))
            else:
                residual = max(residual, max(0.0, np.pi - theta_other))
        if not reroutes:
            ts = _portal_params(chain, sided, portals)
            return edges, faces, ts, residual, history
        done_v = set()
        for pi, v in sorted(reroutes, reverse=True):
            if v in done_v:
                continue
            done_v.add(v)
            _reroute(mesh, edges, faces, pi, v)
    ts = _portal_params(chain, sided, portals)
    return edges, faces, ts, residual, history


def _reroute(mesh, edges, faces, pi, v):
    """Send the corridor around the far side of vertex v at portal pi."""
    j0 = pi
    while j0 > 0 and v in mesh.edges[edges[j0 - 1]]:
        j0 -= 1
    j1 = pi
    while j1 + 1 < len(edges) and v in mesh.edges[edges[j1 + 1]]:
        j1 += 1
    f_in, f_out = faces[j0], faces[j1 + 1]
    route = _fan_route(mesh, v, f_in, lambda f: f == f_out,
                       avoid_edge=edges[j0])
    if route is None:
        return
    rfaces, redges = route
    edges[j0:j1 + 1] = redges
    faces[j0:j1 + 2] = rfaces


def _portal_params(chain, sided, portals):
    """Crossing parameter on each portal (canonical edge orientation)."""
    ts = []
    for (L, R, lv, rv), (p0, p1, v0, v1) in zip(sided, portals):
        t_best, err_best = 0.5, np.inf
        for k in range(len(chain) - 1):
            c0, c1 = chain[k], chain[k + 1]
            d = c1 - c0
            e = p1 - p0
            det = d[0] * (-e[1]) - d[1] * (-e[0])
            if abs(det) < 1e-30:
                continue
            rhs = p0 - c0
            s = (rhs[0] * (-e[1]) - rhs[1] * (-e[0])) / det
            t = (d[0] * rhs[1] - d[1] * rhs[0]) / det
            err = max(0.0, -s) + max(0.0, s - 1.0) + max(0.0, -t) + max(0.0, t - 1.0)
            if err < err_best:
                err_best = err
                t_best = float(np.clip(t, 0.0, 1.0))
        ts.append(t_best)
    return ts


# -- path utilities --------------------------------------------------------


def _segment_face(mesh: TriangleMesh, sup_a, sup_b):
    """Face containing the polyline segment between two tagged points."""
    if sup_a[0] == "face":
        return int(sup_a[1])
    if sup_b[0] == "face":
        return int(sup_b[1])
    fa = set(int(f) for f in mesh.faces_of_edge(sup_a[1]) if f >= 0)
    fb = set(int(f) for f in mesh.faces_of_edge(sup_b[1]) if f >= 0)
    common = fa & fb
    if common:
        return common.pop()
    return fa.pop()


def meshpoint_at(mesh: TriangleMesh, path: GeodesicPath, s: float) -> MeshPoint:
    """On-mesh point at arc length ``s`` along a geodesic path."""
    arcs = path.arcs
    s = float(np.clip(s, 0.0, arcs[-1]))
    i = int(np.searchsorted(arcs, s, side="right") - 1)
    i = min(i, len(path.points) - 2)
    fi = _segment_face(mesh, path.supports[i], path.supports[i + 1])
    x = path.point_at(s)
    V = mesh.vertices[mesh.faces[fi]]
    T = np.column_stack([V[1] - V[0], V[2] - V[0]])
    lam, *_ = np.linalg.lstsq(T, x - V[0], rcond=None)
    bc = np.array([1.0 - lam.sum(), lam[0], lam[1]])
    if bc.min() < -1e-9 or abs(bc.sum() - 1.0) > 1e-9:
        return MeshPoint.locate(mesh, x)
    return MeshPoint(fi, bc)


def subpath(path: GeodesicPath, s0: float, s1: float) -> GeodesicPath:
    """Slice of a path between arc lengths ``s0 <= s1``."""
    arcs = path.arcs
    s0 = float(np.clip(s0, 0.0, arcs[-1]))
    s1 = float(np.clip(s1, s0, arcs[-1]))
    keep = (arcs > s0 + 1e-12) & (arcs < s1 - 1e-12)
    pts = [path.point_at(s0)] + [path.points[k] for k in np.nonzero(keep)[0]] \
        + [path.point_at(s1)]
    sups = [path.supports[int(np.searchsorted(arcs, s0, side="right") - 1)]] \
        + [path.supports[k] for k in np.nonzero(keep)[0]] \
        + [path.supports[min(int(np.searchsorted(arcs, s1, side="right") - 1),
                             len(path.supports) - 1)]]
    arr = np.array(pts)
    length = float(np.linalg.norm(np.diff(arr, axis=0), axis=1).sum())
    return GeodesicPath(points=arr, supports=sups, length=length,
                        residual=path.residual)


def reversed_path(path: GeodesicPath) -> GeodesicPath:
    return GeodesicPath(points=path.points[::-1].copy(),
                        supports=list(reversed(path.supports)),
                        length=path.length, residual=path.residual,
                        truncated=path.truncated)


# -- public operations ----------------------------------------------------


def shortest_geodesic(mesh: TriangleMesh, p: MeshPoint, q: MeshPoint,
                      tol: float = STRAIGHTNESS_TOL,
                      source_field=None) -> GeodesicPath:
    """Locally shortest geodesic between two on-mesh points.

    ``source_field`` optionally reuses a ``dijkstra_from(mesh, p)`` result
    when many queries share the same source.
    """
    ppos, qpos = p.position(mesh), q.position(mesh)
    if np.linalg.norm(ppos - qpos) < 1e-14:
        return GeodesicPath(points=np.array([ppos, qpos]),
                            supports=[("face", p.face), ("face", q.face)],
                            length=0.0)
    if p.face == q.face:
        return GeodesicPath(
            points=np.array([ppos, qpos]),
            supports=[("face", p.face), ("face", q.face)],
            length=float(np.linalg.norm(qpos - ppos)))
    dist, pred = source_field if source_field is not None else dijkstra_from(mesh, p)
    vpath = _vertex_path(mesh, dist, pred, q)
    edges, faces = _initial_corridor(mesh, p, q, vpath)
    edges, faces, ts, residual, history = _shorten_corridor(
        mesh, ppos, qpos, edges, faces)
    pts = [ppos]
    supports: list = [("face", faces[0] if faces else p.face)]
    for e, t in zip(edges, ts):
        pt = mesh.edge_point(e, t)
        if np.linalg.norm(pt - pts[-1]) > 1e-14:
            pts.append(pt)
            supports.append(("edge", int(e), float(t)))
    pts.append(qpos)
    supports.append(("face", faces[-1] if faces else q.face))
    arr = np.array(pts)
    length = float(np.linalg.norm(np.diff(arr, axis=0), axis=1).sum())
    return GeodesicPath(points=arr, supports=supports, length=length,
                        residual=float(residual), history=history)


def trace_geodesic(mesh: TriangleMesh, start: MeshPoint, direction,
                   length: float) -> GeodesicPath:
    """Straightest geodesic from ``start`` along a tangent ``direction``.

    The trace is truncated (and flagged) where it leaves the mesh boundary.
    """
    d = np.asarray(direction, dtype=float)
    fi = start.face
    n = mesh.face_normals[fi]
    d = d - np.dot(d, n) * n
    nd = np.linalg.norm(d)
    if nd < 1e-14:
        raise GeodesicError("direction is not tangent to the mesh")
    d /= nd

    x = start.position(mesh)
    pts = [x.copy()]
    supports: list = [("face", fi)]
    remaining = float(length)
    truncated = False
    via_edge = -1
    for _ in range(200_000):
        tri = mesh.faces[fi]
        V = mesh.vertices[tri]
        n = mesh.face_normals[fi]
        u1 = V[1] - V[0]
        u1 = u1 / np.linalg.norm(u1)
        u2 = np.cross(n, u1)
        x2 = np.array([np.dot(x - V[0], u1), np.dot(x - V[0], u2)])
        d2 = np.array([np.dot(d, u1), np.dot(d, u2)])
        best = None
        for k in range(3):
            e = int(mesh.face_edges[fi, k])
            if e == via_edge:
                continue
            a, b = mesh.edges[e]
            A = np.array([np.dot(mesh.vertices[a] - V[0], u1),
                          np.dot(mesh.vertices[a] - V[0], u2)])
            B = np.array([np.dot(mesh.vertices[b] - V[0], u1),
                          np.dot(mesh.vertices[b] - V[0], u2)])
            m = np.column_stack([d2, A - B])
            det = np.linalg.det(m)
            if abs(det) < 1e-15:
                continue
            s, t = np.linalg.solve(m, A - x2)
            if s > 1e-12 and -1e-9 <= t <= 1 + 1e-9:
                if best is None or s < best[0]:
                    best = (s, e, float(np.clip(t, 0.0, 1.0)))
        if best is None:
            truncated = True
            break
        s, e, t = best
        if s >= remaining:
            x = x + remaining * d
            pts.append(x)
            supports.append(("face", fi))
            remaining = 0.0
            break
        # step to the edge; param along the canonical edge orientation,
        # nudged off exact vertex hits
        a, b = mesh.edges[e]
        edge_vec = mesh.vertices[b] - mesh.vertices[a]
        x = pts[-1] + s * d
        tt = float(np.dot(x - mesh.vertices[a], edge_vec) /
                   np.dot(edge_vec, edge_vec))
        tt = float(np.clip(tt, 1e-7, 1.0 - 1e-7))
        x = mesh.edge_point(e, tt)
        pts.append(x.copy())
        supports.append(("edge", e, tt))
        remaining -= s
        fa, fb = mesh.faces_of_edge(e)
        nxt = fb if fa == fi else fa
        if nxt < 0:
            truncated = True
            break
        eh = edge_vec / np.linalg.norm(edge_vec)
        n1, n2 = mesh.face_normals[fi], mesh.face_normals[nxt]
        b1, b2 = np.cross(n1, eh), np.cross(n2, eh)
        d = np.dot(d, eh) * eh + np.dot(d, b1) * b2
        d /= np.linalg.norm(d)
        fi = nxt
        via_edge = e
    arr = np.array(pts)
    total = float(np.linalg.norm(np.diff(arr, axis=0), axis=1).sum()) if len(arr) > 1 else 0.0
    return GeodesicPath(points=arr, supports=supports, length=total,
                        truncated=truncated)


def path_crossing(path_a: GeodesicPath, path_b: GeodesicPath):
    """Closest approach of two path polylines.

    Returns (s_a, s_b, gap): arc-length positions on each path and the
    distance between the closest points.
    """
    P, Q = path_a.points, path_b.points
    arcs_a, arcs_b = path_a.arcs, path_b.arcs
    best = (0.0, 0.0, np.inf)
    A0, A1 = P[:-1], P[1:]
    for j in range(len(Q) - 1):
        B0, B1 = Q[j], Q[j + 1]
        sa, sb, d2 = _seg_seg_batch(A0, A1, B0, B1)
        k = int(np.argmin(d2))
        if d2[k] < best[2] ** 2:
            pa = arcs_a[k] + sa[k] * (arcs_a[k + 1] - arcs_a[k])
            pb = arcs_b[j] + sb[k] * (arcs_b[j + 1] - arcs_b[j])
            best = (float(pa), float(pb), float(np.sqrt(d2[k])))
    return best


def _seg_seg_batch(A0, A1, B0, B1):
    """Closest-point params between many segments A and one segment B."""
    u = A1 - A0
    v = B1 - B0
    w0 = A0 - B0
    a = np.einsum("ij,ij->i", u, u)
    b = np.einsum("ij,j->i", u, v)
    c = float(np.dot(v, v))
    d = np.einsum("ij,ij->i", u, w0)
    e = np.einsum("ij,j->i", w0, v)
    den = a * c - b * b
    s = np.where(den > 1e-18, (b * e - c * d) / np.where(den > 1e-18, den, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = np.where(c > 1e-18, (e + b * s) / c, 0.0)
    t = np.clip(t, 0.0, 1.0)
    s = np.where(a > 1e-18, np.clip((b * t - d) / np.where(a > 1e-18, a, 1.0), 0.0, 1.0), s)
    diff = (A0 + s[:, None] * u) - (B0 + t[:, None] * v)
    return s, t, np.einsum("ij,ij->i", diff, diff)
