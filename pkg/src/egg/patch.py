"""Geodesic quad patches and their one-parameter planar counterparts.

A patch is framed by four boundary geodesics between four corner points
(counterclockwise). The planar counterpart is a straight-sided quad with
the same side lengths; its remaining degree of freedom is the corner angle
``alpha_bar`` at corner 1. Sides are indexed 1..4:

    s1: corner1 -> corner2      s2: corner2 -> corner3
    s3: corner3 -> corner4      s4: corner4 -> corner1

For opposite-boundary matching, "aligned" side coordinates run c1->c2 on
s1, c4->c3 on s3, c1->c4 on s4 and c2->c3 on s2, so u sweeps both members
of a pair in the same direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geodesic import (GeodesicPath, dijkstra_from, meshpoint_at,
                       path_crossing, reversed_path, shortest_geodesic,
                       subpath)
from .mesh import MeshPoint, TriangleMesh, gaussian_curvature


class PatchError(ValueError):
    pass


# aligned orientation per side: +1 keeps loop direction, -1 reverses it
_SIDE_ALIGN = {1: +1, 2: +1, 3: -1, 4: -1}


def _path_faces(mesh, path) -> set:
    """All faces a geodesic polyline passes through (conservatively:
    both faces of every crossed edge)."""
    out = set()
    for tag in path.supports:
        if tag[0] == "face":
            out.add(int(tag[1]))
        else:
            for f in mesh.faces_of_edge(int(tag[1])):
                if f >= 0:
                    out.add(int(f))
    return out


@dataclass
class SurfacePatch:
    """Region of a mesh framed by four boundary geodesics."""

    mesh: TriangleMesh
    corners: list            # 4 MeshPoint, counterclockwise
    boundaries: list         # 4 GeodesicPath in loop order s1..s4
    side_lengths: np.ndarray  # (4,)
    diag_e: float            # shortest geodesic corner2 -- corner4
    diag_f: float            # shortest geodesic corner1 -- corner3
    diag_e_path: GeodesicPath = None
    diag_f_path: GeodesicPath = None
    face_set: np.ndarray = None  # face ids counted as patch area

    def __post_init__(self):
        if self.face_set is None:
            self.face_set = np.arange(len(self.mesh.faces))

    @property
    def area(self) -> float:
        return float(self.mesh.face_areas[self.face_set].sum())

    @property
    def diagonal(self) -> float:
        """Characteristic size: longer of the two geodesic diagonals."""
        return max(self.diag_e, self.diag_f)

    def side(self, i: int) -> GeodesicPath:
        return self.boundaries[i - 1]

    def side_point(self, i: int, u: float) -> np.ndarray:
        path = self.boundaries[i - 1]
        u = u if _SIDE_ALIGN[i] > 0 else 1.0 - u
        return path.point_at(u * path.length)

    def side_meshpoint(self, i: int, u: float) -> MeshPoint:
        path = self.boundaries[i - 1]
        u = u if _SIDE_ALIGN[i] > 0 else 1.0 - u
        return meshpoint_at(self.mesh, path, u * path.length)

    def interior_faces(self) -> np.ndarray:
        """Faces strictly inside the boundary loop.

        Flood fill over face adjacency, seeded at a diagonal midpoint and
        blocked at every face a boundary geodesic passes through.
        """
        blocked = set()
        for side in self.boundaries:
            blocked |= _path_faces(self.mesh, side)
        seed = None
        for frac in (0.5, 0.4, 0.6, 0.3, 0.7):
            for path in (self.diag_e_path, self.diag_f_path):
                if path is None:
                    continue
                mp = meshpoint_at(self.mesh, path, frac * path.length)
                if mp.face not in blocked:
                    seed = mp.face
                    break
            if seed is not None:
                break
        if seed is None:
            return np.empty(0, dtype=int)
        visited = {seed}
        stack = [seed]
        while stack:
            f = stack.pop()
            for e in self.mesh.face_edges[f]:
                for g in self.mesh.faces_of_edge(e):
                    if g >= 0 and g not in visited and g not in blocked:
                        visited.add(g)
                        stack.append(g)
        return np.fromiter(visited, dtype=int)

    def to_json(self) -> dict:
        return {
            "corners": [[int(c.face), c.bary.tolist()] for c in self.corners],
            "side_lengths": self.side_lengths.tolist(),
            "e": self.diag_e,
            "f": self.diag_f,
            "boundaries": [b.to_json() for b in self.boundaries],
        }


@dataclass
class PlanarQuad:
    """Straight-sided planar quad with the patch's side lengths."""

    side_lengths: np.ndarray
    alpha_bar: float
    vertices: np.ndarray      # (4, 2): corners 1..4

    @property
    def diag_e(self) -> float:
        return float(np.linalg.norm(self.vertices[1] - self.vertices[3]))

    @property
    def diag_f(self) -> float:
        return float(np.linalg.norm(self.vertices[0] - self.vertices[2]))

    def side_point(self, i: int, u: float) -> np.ndarray:
        a, b = _SIDE_CORNERS[i]
        return (1 - u) * self.vertices[a] + u * self.vertices[b]

    def to_json(self) -> dict:
        return {"side_lengths": self.side_lengths.tolist(),
                "alpha_bar": self.alpha_bar,
                "vertices": self.vertices.tolist()}


# aligned side endpoints as corner indices (0-based)
_SIDE_CORNERS = {1: (0, 1), 2: (1, 2), 3: (3, 2), 4: (0, 3)}


@dataclass
class UniquenessReport:
    K_max: float
    bound: float              # pi / sqrt(K_max), inf when K_max <= 0
    longest_geodesic: float
    passed: bool
    peak_vertex: int

    def to_json(self) -> dict:
        return {"K_max": self.K_max, "bound": self.bound,
                "longest_geodesic": self.longest_geodesic,
                "pass": self.passed, "peak_vertex": self.peak_vertex}


@dataclass
class FeasibilityResult:
    alphas: np.ndarray
    e: float
    f: float
    e_bar: np.ndarray
    f_bar: np.ndarray
    product: np.ndarray       # (e - e_bar) * (f - f_bar)
    feasible_intervals: list  # [(a0, a1), ...] where product < 0
    feasible: bool

    def to_json(self) -> dict:
        return {"alphas": self.alphas.tolist(), "e": self.e, "f": self.f,
                "e_bar": self.e_bar.tolist(), "f_bar": self.f_bar.tolist(),
                "product": self.product.tolist(),
                "feasible_intervals": self.feasible_intervals,
                "feasible": self.feasible}


# -- construction ----------------------------------------------------------


def build_patch(mesh: TriangleMesh, corners: list) -> SurfacePatch:
    """Frame a patch with four boundary geodesics between the corners.

    Corners must be distinct and given in boundary (counterclockwise)
    order. Rejects non-convex quads (naming the reflex corner) and
    boundaries that cross away from the corners.
    """
    if len(corners) != 4:
        raise PatchError("exactly four corners required")
    pos = [c.position(mesh) for c in corners]
    for i in range(4):
        for j in range(i + 1, 4):
            if np.linalg.norm(pos[i] - pos[j]) < 1e-12:
                raise PatchError(f"corners {i + 1} and {j + 1} coincide")

    fields = [dijkstra_from(mesh, c) for c in corners]
    sides = []
    for i in range(4):
        sides.append(shortest_geodesic(mesh, corners[i], corners[(i + 1) % 4],
                                       source_field=fields[i]))
    diag_e_path = shortest_geodesic(mesh, corners[1], corners[3],
                                    source_field=fields[1])
    diag_f_path = shortest_geodesic(mesh, corners[0], corners[2],
                                    source_field=fields[0])

    reflex = _reflex_corners(mesh, sides)
    if reflex:
        raise PatchError(
            f"geodesic quad is not convex: reflex corner {reflex[0] + 1}")
    _check_side_crossings(sides)

    return SurfacePatch(
        mesh=mesh, corners=list(corners), boundaries=sides,
        side_lengths=np.array([s.length for s in sides]),
        diag_e=diag_e_path.length, diag_f=diag_f_path.length,
        diag_e_path=diag_e_path, diag_f_path=diag_f_path)


def _reflex_corners(mesh: TriangleMesh, sides) -> list[int]:
    """Corner indices whose interior turning angle is not in (0, pi)."""
    angles = []
    for i in range(4):
        outgoing = sides[i].tangent_at(0.0)
        incoming = sides[(i - 1) % 4].tangent_at(sides[(i - 1) % 4].length)
        corner_pt = sides[i].points[0]
        n = _surface_normal_near(mesh, corner_pt)
        a = outgoing - np.dot(outgoing, n) * n
        b = -incoming + np.dot(incoming, n) * n
        ang = np.arctan2(np.dot(n, np.cross(a, b)), np.dot(a, b))
        angles.append(ang)
    total = sum(angles)
    if total < 0:  # corners given clockwise w.r.t. this normal field
        angles = [-a for a in angles]
    return [i for i, a in enumerate(angles) if not (1e-9 < a < np.pi - 1e-9)]


def _surface_normal_near(mesh: TriangleMesh, x: np.ndarray) -> np.ndarray:
    mp = MeshPoint.locate(mesh, x)
    return mesh.face_normals[mp.face]


def _check_side_crossings(sides):
    for i in range(4):
        for j in range(i + 1, 4):
            sa, sb, gap = path_crossing(sides[i], sides[j])
            if gap > 1e-9:
                continue
            la, lb = sides[i].length, sides[j].length
            at_corner = (min(sa, la - sa) < 1e-6 * max(la, 1.0)
                         and min(sb, lb - sb) < 1e-6 * max(lb, 1.0))
            if not at_corner:
                raise PatchError(
                    f"boundary geodesics s{i + 1} and s{j + 1} intersect "
                    "away from the corners")


def alpha_closure_interval(side_lengths) -> tuple[float, float]:
    """Interval of corner-1 angles for which the quad closes."""
    l1, l2, l3, l4 = (float(x) for x in side_lengths)
    lo = (l1 * l1 + l4 * l4 - (l2 + l3) ** 2) / (2 * l1 * l4)
    hi = (l1 * l1 + l4 * l4 - (l2 - l3) ** 2) / (2 * l1 * l4)
    lo, hi = max(lo, -1.0), min(hi, 1.0)
    if lo >= hi:
        raise PatchError(
            f"side lengths {side_lengths} cannot close into a quad")
    # arccos is decreasing: the upper cosine bound gives the lower angle
    return float(np.arccos(hi)), float(np.arccos(lo))


def build_planar_quad(side_lengths, alpha_bar: float) -> PlanarQuad:
    """Planar quad from four side lengths and the corner-1 angle."""
    side_lengths = np.asarray(side_lengths, dtype=float)
    if np.any(side_lengths <= 0):
        raise PatchError("side lengths must be positive")
    a_lo, a_hi = alpha_closure_interval(side_lengths)
    if not (a_lo - 1e-12 <= alpha_bar <= a_hi + 1e-12):
        raise PatchError(
            f"alpha_bar {alpha_bar:.6f} outside closure interval "
            f"[{a_lo:.6f}, {a_hi:.6f}]")
    l1, l2, l3, l4 = side_lengths
    A = np.array([0.0, 0.0])
    B = np.array([l1, 0.0])
    D = l4 * np.array([np.cos(alpha_bar), np.sin(alpha_bar)])
    # corner 3 from the circle intersection |C-B| = l2, |C-D| = l3,
    # on the far side of the diagonal BD from corner 1
    C = _circle_intersection(B, l2, D, l3, away_from=A)
    verts = np.array([A, B, C, D])
    gap = np.linalg.norm(verts[3] - (verts[0] + D - A))
    if gap > 1e-9:
        raise PatchError("planar quad failed to close")
    return PlanarQuad(side_lengths=side_lengths.copy(),
                      alpha_bar=float(alpha_bar), vertices=verts)


def _circle_intersection(P, rp, Q, rq, away_from):
    d = Q - P
    L = np.linalg.norm(d)
    if L > rp + rq + 1e-12 or L < abs(rp - rq) - 1e-12:
        raise PatchError("quad cannot close at this angle")
    u = d / L
    w = np.array([-u[1], u[0]])
    x = (rp * rp - rq * rq + L * L) / (2 * L)
    y2 = rp * rp - x * x
    y = np.sqrt(max(y2, 0.0))
    c1 = P + x * u + y * w
    c2 = P + x * u - y * w
    if np.linalg.norm(c1 - away_from) >= np.linalg.norm(c2 - away_from):
        return c1
    return c2


# -- screening -------------------------------------------------------------


def feasibility_check(patch: SurfacePatch, n_samples: int = 200,
                      alpha_range=None) -> FeasibilityResult:
    """Sign of (e - e_bar)(f - f_bar) across the closure interval.

    The patch is feasible where the product is negative: one planar
    diagonal too long and the other too short, so deployment can trade
    them off. Product zero is treated as infeasible (degenerate).
    """
    a_lo, a_hi = alpha_closure_interval(patch.side_lengths)
    if alpha_range is not None:
        a_lo, a_hi = max(a_lo, alpha_range[0]), min(a_hi, alpha_range[1])
    pad = 1e-6 * (a_hi - a_lo)
    alphas = np.linspace(a_lo + pad, a_hi - pad, n_samples)
    e_bar = np.empty(n_samples)
    f_bar = np.empty(n_samples)
    for i, a in enumerate(alphas):
        quad = build_planar_quad(patch.side_lengths, a)
        e_bar[i] = quad.diag_e
        f_bar[i] = quad.diag_f
    product = (patch.diag_e - e_bar) * (patch.diag_f - f_bar)
    ok = product < 0.0
    intervals = _mask_to_intervals(alphas, ok)
    return FeasibilityResult(alphas=alphas, e=patch.diag_e, f=patch.diag_f,
                             e_bar=e_bar, f_bar=f_bar, product=product,
                             feasible_intervals=intervals,
                             feasible=bool(ok.any()))


def _mask_to_intervals(x: np.ndarray, mask: np.ndarray) -> list:
    intervals = []
    start = None
    for i, m in enumerate(mask):
        if m and start is None:
            start = x[i]
        elif not m and start is not None:
            intervals.append((float(start), float(x[i - 1])))
            start = None
    if start is not None:
        intervals.append((float(start), float(x[-1])))
    return intervals


def uniqueness_check(patch: SurfacePatch) -> UniquenessReport:
    """Injectivity-radius screening of shortest-geodesic uniqueness.

    Compares the longest candidate grid geodesic against pi/sqrt(K_max).
    Passing is sufficient but not necessary for uniqueness.
    """
    curv = gaussian_curvature(patch.mesh)
    in_set = np.zeros(len(patch.mesh.vertices), dtype=bool)
    in_set[np.unique(patch.mesh.faces[patch.face_set])] = True
    mask = curv.interior & in_set
    if mask.any():
        K_vals = curv.K[mask]
        k_idx = int(np.nonzero(mask)[0][np.argmax(K_vals)])
        K_max = float(curv.K[k_idx])
    else:
        K_max, k_idx = 0.0, -1
    longest = float(max(patch.side_lengths.max(), patch.diag_e, patch.diag_f))
    if K_max <= 0:
        return UniquenessReport(K_max=K_max, bound=np.inf,
                                longest_geodesic=longest, passed=True,
                                peak_vertex=k_idx)
    bound = float(np.pi / np.sqrt(K_max))
    return UniquenessReport(K_max=K_max, bound=bound,
                            longest_geodesic=longest,
                            passed=longest < bound, peak_vertex=k_idx)


# -- splitting -------------------------------------------------------------


def suggest_split(patch: SurfacePatch, n_candidates: int = 33) -> GeodesicPath:
    """Shortest geodesic between opposite boundaries passing the K peak.

    Scans aligned coordinates on both opposite-side pairs and returns the
    candidate whose path comes closest to the curvature-peak vertex; the
    path must pass within one local edge length of the peak.
    """
    report = uniqueness_check(patch)
    if report.passed:
        raise PatchError("patch already passes uniqueness screening; "
                         "no split needed")
    peak = patch.mesh.vertices[report.peak_vertex]
    edge_len = _local_edge_length(patch.mesh, report.peak_vertex)
    best = None
    for pair in ((4, 2), (1, 3)):
        for u in np.linspace(0.08, 0.92, n_candidates):
            a = patch.side_meshpoint(pair[0], u)
            b = patch.side_meshpoint(pair[1], u)
            g = shortest_geodesic(patch.mesh, a, b)
            d = float(np.min(np.linalg.norm(g.points - peak, axis=1)))
            if best is None or d < best[0]:
                best = (d, g, pair, u)
    if best is None or best[0] > edge_len:
        raise PatchError(
            "no boundary-to-boundary geodesic passes over the curvature "
            "peak; split the patch manually")
    return best[1]


def _local_edge_length(mesh: TriangleMesh, v: int) -> float:
    edges = [e for e, (a, b) in enumerate(mesh.edges) if v in (a, b)]
    return float(np.max(mesh.edge_lengths[edges]))


def split_patch(patch: SurfacePatch, split: GeodesicPath,
                tol: float = 1e-3) -> tuple[SurfacePatch, SurfacePatch]:
    """Cut a patch in two along a boundary-to-boundary geodesic.

    The split must connect interiors of opposite boundaries and be a
    shortest geodesic between its endpoints (verified by re-shortening).
    The returned patches share the split as a common boundary and
    partition the parent's face set.
    """
    end_a = MeshPoint.locate(patch.mesh, split.points[0])
    end_b = MeshPoint.locate(patch.mesh, split.points[-1])
    side_a, u_a = _side_coordinate(patch, split.points[0])
    side_b, u_b = _side_coordinate(patch, split.points[-1])
    if side_a is None or side_b is None:
        raise PatchError("split endpoints must lie on the patch boundary")
    if {side_a, side_b} not in ({1, 3}, {2, 4}):
        raise PatchError("split must connect opposite boundaries")
    for u, side in ((u_a, side_a), (u_b, side_b)):
        if not 1e-3 < u < 1 - 1e-3:
            raise PatchError(
                f"split endpoint on side s{side} is at a corner "
                "(degenerate sub-quad)")
    check = shortest_geodesic(patch.mesh, end_a, end_b)
    if check.length < split.length - tol * split.length:
        raise PatchError("split is not a shortest geodesic between its "
                         "endpoints")

    if side_a in (2, 3):  # normalize: split runs from s4/s1 to s2/s3
        side_a, side_b = side_b, side_a
        u_a, u_b = u_b, u_a
        split = reversed_path(split)
        end_a, end_b = end_b, end_a

    # first sub-patch keeps corner 1
    if (side_a, side_b) == (1, 3):
        corners1 = [patch.corners[0], end_a, end_b, patch.corners[3]]
        corners2 = [end_a, patch.corners[1], patch.corners[2], end_b]
    else:  # (4, 2): split runs from s4 to s2
        corners1 = [patch.corners[0], patch.corners[1], end_b, end_a]
        corners2 = [end_a, end_b, patch.corners[2], patch.corners[3]]

    fs1, fs2 = _partition_faces(patch, split)
    p1 = build_patch(patch.mesh, corners1)
    p2 = build_patch(patch.mesh, corners2)
    p1.face_set, p2.face_set = fs1, fs2
    return p1, p2


def _side_coordinate(patch: SurfacePatch, x: np.ndarray):
    """(side id, aligned u) of the boundary point nearest to x, or None."""
    best = (None, 0.0, np.inf)
    for i in (1, 2, 3, 4):
        path = patch.boundaries[i - 1]
        arcs = path.arcs
        P0, P1 = path.points[:-1], path.points[1:]
        d = P1 - P0
        L2 = np.einsum("ij,ij->i", d, d)
        t = np.clip(np.einsum("ij,ij->i", x - P0, d) / np.where(L2 > 0, L2, 1),
                    0, 1)
        proj = P0 + t[:, None] * d
        dist = np.linalg.norm(proj - x, axis=1)
        k = int(np.argmin(dist))
        if dist[k] < best[2]:
            s = arcs[k] + t[k] * (arcs[k + 1] - arcs[k])
            u = s / path.length
            if _SIDE_ALIGN[i] < 0:
                u = 1.0 - u
            best = (i, float(u), float(dist[k]))
    if best[2] > 1e-6 * max(patch.diagonal, 1.0):
        return None, 0.0
    return best[0], best[1]


def _partition_faces(patch: SurfacePatch, split: GeodesicPath):
    """Assign each patch face to one side of the split curve."""
    mesh = patch.mesh
    cent = mesh.vertices[mesh.faces[patch.face_set]].mean(axis=1)
    P0, P1 = split.points[:-1], split.points[1:]
    d = P1 - P0
    L2 = np.einsum("ij,ij->i", d, d)
    side = np.empty(len(cent))
    for i, x in enumerate(cent):
        t = np.clip(np.einsum("ij,ij->i", x - P0, d) / np.where(L2 > 0, L2, 1),
                    0, 1)
        proj = P0 + t[:, None] * d
        k = int(np.argmin(np.einsum("ij,ij->i", proj - x, proj - x)))
        n = mesh.face_normals[MeshPoint.locate(mesh, proj[k]).face]
        side[i] = np.dot(np.cross(d[k], x - proj[k]), n)
    fs = np.asarray(patch.face_set)
    return fs[side >= 0], fs[side < 0]


def coverage_gap(patch: SurfacePatch, n_per_family: int = 9) -> float:
    """Worst face-to-nearest-geodesic distance, relative to member spacing.

    Samples boundary-to-boundary shortest geodesics in both directions and
    measures how far patch faces stray from the sampled family. Values
    near or below 1 mean the families sweep the whole patch; large values
    indicate regions no shortest geodesic enters (non-uniqueness symptom).
    """
    mesh = patch.mesh
    pts = []
    spacing = []
    for pair in ((4, 2), (1, 3)):
        us = np.linspace(0.0, 1.0, n_per_family)
        prev = None
        for u in us:
            a = patch.side_meshpoint(pair[0], float(u))
            b = patch.side_meshpoint(pair[1], float(u))
            g = shortest_geodesic(mesh, a, b)
            dense = [g.point_at(s) for s in
                     np.linspace(0, g.length, max(int(g.length /
                                 np.mean(mesh.edge_lengths)) * 2, 8))]
            pts.extend(dense)
            if prev is not None:
                spacing.append(np.linalg.norm(
                    np.asarray(dense[len(dense) // 2]) - prev))
            prev = np.asarray(dense[len(dense) // 2])
    pts = np.asarray(pts)
    inner = patch.interior_faces()
    if len(inner) == 0:
        inner = patch.face_set
    cent = mesh.vertices[mesh.faces[inner]].mean(axis=1)
    gaps = np.empty(len(cent))
    for i, c in enumerate(cent):
        gaps[i] = np.min(np.linalg.norm(pts - c, axis=1))
    return float(gaps.max() / max(np.median(spacing), 1e-12))
