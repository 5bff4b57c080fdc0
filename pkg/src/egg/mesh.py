"""Triangle mesh container, OBJ I/O and discrete Gaussian curvature.

All coordinates are in meters. Meshes must be manifold (with boundary),
consistently oriented and free of degenerate faces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    """Raised for invalid mesh input (non-manifold, degenerate, empty)."""


class TriangleMesh:
    """Manifold triangle mesh with precomputed incidence maps.

    Parameters
    ----------
    vertices : (n, 3) float array, meters
    faces    : (m, 3) int array, CCW-oriented vertex index triples
    """

    def __init__(self, vertices, faces):
        v = np.asarray(vertices, dtype=float)
        f = np.asarray(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        if f.size == 0 or v.size == 0:
            raise MeshError("empty mesh")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError("faces must be an (m, 3) array of triangles")
        if f.min() < 0 or f.max() >= len(v):
            raise MeshError("face index out of range")
        self.vertices = v
        self.faces = f

        cross = np.cross(
            v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]]
        )
        areas2 = np.linalg.norm(cross, axis=1)
        scale = max(1.0, float(np.abs(v).max()))
        degenerate = np.nonzero(areas2 < 1e-14 * scale * scale)[0]
        if degenerate.size:
            raise MeshError(f"degenerate (zero-area) faces: {degenerate.tolist()}")
        self.face_normals = cross / areas2[:, None]
        self.face_areas = 0.5 * areas2

        self._build_edges()
        self._build_vertex_fans()

    # -- incidence -----------------------------------------------------

    def _build_edges(self):
        f = self.faces
        edge_index: dict[tuple[int, int], int] = {}
        edge_faces: list[list[int]] = []
        edge_list: list[tuple[int, int]] = []
        directed_seen: set[tuple[int, int]] = set()
        bad: list[tuple[int, int]] = []
        face_edges = np.empty((len(f), 3), dtype=np.int64)
        for fi, (a, b, c) in enumerate(f):
            for k, (i, j) in enumerate(((a, b), (b, c), (c, a))):
                i, j = int(i), int(j)
                if (i, j) in directed_seen:
                    bad.append((i, j))
                directed_seen.add((i, j))
                key = (i, j) if i < j else (j, i)
                e = edge_index.get(key)
                if e is None:
                    e = len(edge_list)
                    edge_index[key] = e
                    edge_list.append(key)
                    edge_faces.append([])
                edge_faces[e].append(fi)
                face_edges[fi, k] = e
        over = [edge_list[e] for e, fl in enumerate(edge_faces) if len(fl) > 2]
        if bad or over:
            raise MeshError(
                "non-manifold or inconsistently oriented edges: "
                f"{sorted(set(bad) | set(over))}"
            )
        self.edge_index = edge_index
        self.edges = np.array(edge_list, dtype=np.int64)
        self.edge_faces = np.array(
            [fl + [-1] * (2 - len(fl)) for fl in edge_faces], dtype=np.int64
        )
        self.face_edges = face_edges
        self.boundary_edges = np.nonzero(self.edge_faces[:, 1] < 0)[0]
        bvert = np.zeros(len(self.vertices), dtype=bool)
        for e in self.boundary_edges:
            bvert[self.edges[e]] = True
        self.boundary_vertices = bvert

        lens = np.linalg.norm(
            self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]], axis=1
        )
        self.edge_lengths = lens

    def _build_vertex_fans(self):
        """Order incident faces around each vertex.

        ``vertex_fans[v]`` is a list of face ids in cyclic order; for boundary
        vertices the fan is open and starts/ends at boundary edges.
        """
        n = len(self.vertices)
        incident: list[list[int]] = [[] for _ in range(n)]
        for fi, tri in enumerate(self.faces):
            for vv in tri:
                incident[int(vv)].append(fi)

        fans: list[list[int]] = [None] * n  # type: ignore[list-item]
        for v in range(n):
            faces = incident[v]
            if not faces:
                fans[v] = []
                continue
            # map: edge across from v inside each face -> next face
            succ = {}
            prev = {}
            for fi in faces:
                tri = list(self.faces[fi])
                i = tri.index(v)
                nxt = tri[(i + 1) % 3]  # edge (v, nxt) leads CCW
                prv = tri[(i + 2) % 3]
                succ[fi] = self._other_face(self._edge_id(v, prv), fi)
                prev[fi] = self._other_face(self._edge_id(v, nxt), fi)
            # find a start face (after a boundary edge) or any face if closed
            start = faces[0]
            for fi in faces:
                if prev[fi] < 0:
                    start = fi
                    break
            order = [start]
            while True:
                nxt = succ[order[-1]]
                if nxt < 0 or nxt == start or len(order) > len(faces):
                    break
                order.append(nxt)
            fans[v] = order
        self.vertex_fans = fans

    def _edge_id(self, i: int, j: int) -> int:
        return self.edge_index[(i, j) if i < j else (j, i)]

    def _other_face(self, e: int, fi: int) -> int:
        a, b = self.edge_faces[e]
        return int(b) if a == fi else int(a)

    # -- convenience ---------------------------------------------------

    @property
    def total_area(self) -> float:
        return float(self.face_areas.sum())

    def face_vertices(self, fi: int) -> np.ndarray:
        return self.vertices[self.faces[fi]]

    def corner_angle(self, fi: int, v: int) -> float:
        tri = list(self.faces[fi])
        i = tri.index(v)
        p = self.vertices[tri[i]]
        a = self.vertices[tri[(i + 1) % 3]] - p
        b = self.vertices[tri[(i + 2) % 3]] - p
        cosang = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        return float(np.arccos(np.clip(cosang, -1.0, 1.0)))

    def edge_point(self, e: int, t: float) -> np.ndarray:
        a, b = self.edges[e]
        return (1.0 - t) * self.vertices[a] + t * self.vertices[b]

    def faces_of_edge(self, e: int) -> tuple[int, int]:
        a, b = self.edge_faces[e]
        return int(a), int(b)

    def vertex_normal(self, v: int) -> np.ndarray:
        faces = [fi for fi, tri in enumerate(self.faces) if v in tri]
        n = self.face_normals[faces].sum(axis=0)
        return n / np.linalg.norm(n)


@dataclass
class MeshPoint:
    """A point on a mesh, stored as face id plus barycentric coordinates."""

    face: int
    bary: np.ndarray

    def __post_init__(self):
        self.bary = np.asarray(self.bary, dtype=float)
        s = self.bary.sum()
        if abs(s - 1.0) > 1e-9 or self.bary.min() < -1e-12:
            raise ValueError(f"invalid barycentric coordinates {self.bary}")
        self.bary = np.clip(self.bary, 0.0, None)
        self.bary /= self.bary.sum()

    def position(self, mesh: TriangleMesh) -> np.ndarray:
        return self.bary @ mesh.vertices[mesh.faces[self.face]]

    def vertex_id(self, mesh: TriangleMesh, tol: float = 1e-9) -> int | None:
        """Mesh vertex id if this point coincides with one, else None."""
        k = int(np.argmax(self.bary))
        if self.bary[k] > 1.0 - tol:
            return int(mesh.faces[self.face][k])
        return None

    @staticmethod
    def at_vertex(mesh: TriangleMesh, v: int) -> "MeshPoint":
        fi = mesh.vertex_fans[v][0]
        bary = np.zeros(3)
        bary[list(mesh.faces[fi]).index(v)] = 1.0
        return MeshPoint(fi, bary)

    @staticmethod
    def locate(mesh: TriangleMesh, x) -> "MeshPoint":
        """Nearest on-mesh point to an arbitrary 3D point."""
        x = np.asarray(x, dtype=float)
        bary, d2 = _closest_point_barycentric(mesh, x)
        fi = int(np.argmin(d2))
        return MeshPoint(fi, bary[fi])

    @staticmethod
    def on_edge(mesh: TriangleMesh, e: int, t: float) -> "MeshPoint":
        fi = int(mesh.edge_faces[e, 0])
        a, b = mesh.edges[e]
        tri = list(mesh.faces[fi])
        bary = np.zeros(3)
        bary[tri.index(a)] = 1.0 - t
        bary[tri.index(b)] = t
        return MeshPoint(fi, bary)


def _closest_point_barycentric(mesh: TriangleMesh, x: np.ndarray):
    """Barycentric coords of the closest point to ``x`` on every face.

    Returns (bary (nf, 3), squared distances (nf,)). Vectorized version of
    the standard region-based closest-point-on-triangle test.
    """
    A = mesh.vertices[mesh.faces[:, 0]]
    B = mesh.vertices[mesh.faces[:, 1]]
    C = mesh.vertices[mesh.faces[:, 2]]
    ab, ac, ap = B - A, C - A, x - A
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = x - B
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = x - C
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    denom = va + vb + vc
    v = np.where(np.abs(denom) > 1e-300, vb / np.where(denom == 0, 1, denom), 0.0)
    w = np.where(np.abs(denom) > 1e-300, vc / np.where(denom == 0, 1, denom), 0.0)
    # interior candidate, then clamp to the three edge regions / vertices
    bary = np.stack([1.0 - v - w, v, w], axis=1)
    # vertex regions
    bary[(d1 <= 0) & (d2 <= 0)] = [1.0, 0.0, 0.0]
    mb = (d3 >= 0) & (d4 <= d3)
    bary[mb] = [0.0, 1.0, 0.0]
    mc = (d6 >= 0) & (d5 <= d6)
    bary[mc] = [0.0, 0.0, 1.0]
    # edge AB
    m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    t = np.where(np.abs(d1 - d3) > 0, d1 / np.where(d1 - d3 == 0, 1, d1 - d3), 0.0)
    bary[m] = np.stack([1.0 - t, t, np.zeros_like(t)], axis=1)[m]
    # edge AC
    m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    t = np.where(np.abs(d2 - d6) > 0, d2 / np.where(d2 - d6 == 0, 1, d2 - d6), 0.0)
    bary[m] = np.stack([1.0 - t, np.zeros_like(t), t], axis=1)[m]
    # edge BC
    m = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    den = (d4 - d3) + (d5 - d6)
    t = np.where(np.abs(den) > 0, (d4 - d3) / np.where(den == 0, 1, den), 0.0)
    bary[m] = np.stack([np.zeros_like(t), 1.0 - t, t], axis=1)[m]
    bary = np.clip(bary, 0.0, 1.0)
    bary /= bary.sum(axis=1, keepdims=True)
    closest = (bary[:, 0, None] * A + bary[:, 1, None] * B + bary[:, 2, None] * C)
    diff = closest - x
    return bary, np.einsum("ij,ij->i", diff, diff)


def closest_distances(mesh: TriangleMesh, points: np.ndarray) -> np.ndarray:
    """Distance from each query point to the mesh surface."""
    out = np.empty(len(points))
    for i, x in enumerate(np.asarray(points, dtype=float)):
        _, d2 = _closest_point_barycentric(mesh, x)
        out[i] = np.sqrt(d2.min())
    return out


@dataclass
class CurvatureField:
    """Per-vertex Gaussian curvature via angle defect over mixed area."""

    K: np.ndarray
    K_max: float
    peak_vertex: int
    interior: np.ndarray  # bool mask of vertices contributing to K_max
    flagged: list = field(default_factory=list)  # zero-mixed-area vertices


def gaussian_curvature(mesh: TriangleMesh) -> CurvatureField:
    """Angle-defect Gaussian curvature with Meyer mixed-Voronoi areas.

    Boundary vertices and vertices with vanishing mixed area are excluded
    from the ``K_max`` statistic.
    """
    n = len(mesh.vertices)
    defect = np.full(n, 2.0 * np.pi)
    defect[mesh.boundary_vertices] = np.pi
    area = np.zeros(n)

    v = mesh.vertices
    f = mesh.faces
    for fi in range(len(f)):
        tri = f[fi]
        p = v[tri]
        # corner angles
        ang = np.empty(3)
        for k in range(3):
            a = p[(k + 1) % 3] - p[k]
            b = p[(k + 2) % 3] - p[k]
            ang[k] = np.arccos(
                np.clip(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)), -1, 1)
            )
        defect[tri] -= ang
        if ang.max() < np.pi / 2 + 1e-12:
            # non-obtuse: Voronoi area
            for k in range(3):
                l2a = np.sum((p[(k + 2) % 3] - p[k]) ** 2)
                l2b = np.sum((p[(k + 1) % 3] - p[k]) ** 2)
                cot_a = 1.0 / np.tan(ang[(k + 1) % 3])
                cot_b = 1.0 / np.tan(ang[(k + 2) % 3])
                area[tri[k]] += (l2a * cot_a + l2b * cot_b) / 8.0
        else:
            fa = mesh.face_areas[fi]
            obtuse = int(np.argmax(ang))
            for k in range(3):
                area[tri[k]] += fa / 2.0 if k == obtuse else fa / 4.0

    K = np.zeros(n)
    flagged = np.nonzero(area < 1e-16)[0].tolist()
    ok = area >= 1e-16
    K[ok] = defect[ok] / area[ok]
    interior = ok & ~mesh.boundary_vertices
    if interior.any():
        ids = np.nonzero(interior)[0]
        peak = ids[int(np.argmax(K[ids]))]
        kmax = float(K[peak])
    else:
        peak, kmax = -1, 0.0
    return CurvatureField(K=K, K_max=kmax, peak_vertex=int(peak),
                          interior=interior, flagged=flagged)


# -- OBJ I/O -----------------------------------------------------------


def load_mesh(path) -> TriangleMesh:
    """Load a triangles-only OBJ file (units: meters)."""
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(tok.split("/")[0]) for tok in parts[1:]]
                if len(idx) != 3:
                    raise MeshError("only triangular faces are supported")
                faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    if not verts or not faces:
        raise MeshError(f"empty mesh in {path}")
    return TriangleMesh(verts, faces)


def save_mesh(mesh: TriangleMesh, path) -> None:
    with open(path, "w") as fh:
        for p in mesh.vertices:
            fh.write(f"v {p[0]:.12g} {p[1]:.12g} {p[2]:.12g}\n")
        for tri in mesh.faces:
            fh.write(f"f {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}\n")
