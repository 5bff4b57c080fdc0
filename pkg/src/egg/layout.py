"""Grid layout: members, connections, notches, supports, validation.

Members are sampled from the cladding functions of both families. Each
member exists in two states: a straight planar segment on the quad and a
geodesic curve on the surface, with equal lengths (condition on total
lengths) — the per-member match is refined here with exact geodesic
queries rather than trusting the interpolated distance map. Partial
lengths agree on boundary members (condition on partial lengths);
interior mismatches become the notch sliding demands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cladding import CladdingFunction, _FAMILY_SIDES, _segment_cross_param
from .geodesic import GeodesicPath, path_crossing, shortest_geodesic
from .mesh import closest_distances
from .patch import PlanarQuad, SurfacePatch


class LayoutError(ValueError):
    pass


@dataclass
class GridMember:
    id: int
    family: str               # blue | pink
    u1: float                  # coordinate on the start side
    u2: float                  # coordinate on the end side
    surface_curve: GeodesicPath
    planar_start: np.ndarray   # (2,)
    planar_end: np.ndarray     # (2,)
    boundary: bool

    @property
    def length(self) -> float:
        return self.surface_curve.length

    @property
    def planar_length(self) -> float:
        return float(np.linalg.norm(self.planar_end - self.planar_start))

    def planar_point_at(self, s: float) -> np.ndarray:
        t = np.clip(s / max(self.planar_length, 1e-30), 0.0, 1.0)
        return (1 - t) * self.planar_start + t * self.planar_end

    def to_json(self) -> dict:
        return {"id": self.id, "family": self.family,
                "u1": self.u1, "u2": self.u2,
                "surface_points": self.surface_curve.points.tolist(),
                "planar_start": self.planar_start.tolist(),
                "planar_end": self.planar_end.tolist(),
                "length": self.length, "boundary": self.boundary}


@dataclass
class Connection:
    id: int
    blue_id: int
    pink_id: int
    surface_point: np.ndarray  # (3,)
    planar_point: np.ndarray   # (2,)
    s_blue_surface: float
    s_blue_planar: float
    s_pink_surface: float
    s_pink_planar: float
    boundary: bool             # involves a boundary member

    @property
    def delta_blue(self) -> float:
        return self.s_blue_surface - self.s_blue_planar

    @property
    def delta_pink(self) -> float:
        return self.s_pink_surface - self.s_pink_planar

    def to_json(self) -> dict:
        return {"id": self.id, "blue_id": self.blue_id,
                "pink_id": self.pink_id,
                "surface_point": self.surface_point.tolist(),
                "planar_point": self.planar_point.tolist(),
                "s_blue_surface": self.s_blue_surface,
                "s_blue_planar": self.s_blue_planar,
                "s_pink_surface": self.s_pink_surface,
                "s_pink_planar": self.s_pink_planar,
                "boundary": self.boundary}


@dataclass
class NotchSpec:
    connection_id: int
    delta_blue: float          # signed slide demand (m)
    delta_pink: float
    slot_length_blue: float
    slot_length_pink: float
    slot_width: float
    warning: str | None = None

    def to_json(self) -> dict:
        return {"connection_id": self.connection_id,
                "delta_blue": self.delta_blue, "delta_pink": self.delta_pink,
                "slot_length_blue": self.slot_length_blue,
                "slot_length_pink": self.slot_length_pink,
                "slot_width": self.slot_width, "warning": self.warning}


@dataclass
class Support:
    connection_id: int
    point: np.ndarray          # (3,), deployed anchor
    normal: np.ndarray         # (3,), tangent-plane unit normal
    wedge_angle: float         # rad, tangent plane vs ground

    def to_json(self) -> dict:
        return {"connection_id": self.connection_id,
                "point": self.point.tolist(),
                "normal": self.normal.tolist(),
                "wedge_angle": self.wedge_angle}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


@dataclass
class GridLayout:
    members: list              # GridMember, blue first
    connections: list          # Connection
    notches: list = field(default_factory=list)
    supports: list = field(default_factory=list)
    alpha_bar: float = 0.0
    alpha_deployed: float = 0.0

    def member(self, mid: int) -> GridMember:
        return self.members[mid]

    def family(self, fam: str) -> list:
        return [m for m in self.members if m.family == fam]

    def to_json(self) -> dict:
        return {"alpha_bar": self.alpha_bar,
                "alpha_deployed": self.alpha_deployed,
                "members": [m.to_json() for m in self.members],
                "connections": [c.to_json() for c in self.connections],
                "notches": [n.to_json() for n in self.notches],
                "supports": [s.to_json() for s in self.supports]}


# -- member generation -------------------------------------------------------


def _refined_member(patch: SurfacePatch, quad: PlanarQuad, family: str,
                    u1: float, u2_init: float, mid: int,
                    boundary: bool) -> GridMember:
    """Member with u2 refined so surface and planar lengths match exactly."""
    sa, sb = _FAMILY_SIDES[family]
    pa = quad.side_point(sa, u1)
    ga = patch.side_meshpoint(sa, u1)

    def mismatch(u2):
        gb = patch.side_meshpoint(sb, float(u2))
        g = shortest_geodesic(patch.mesh, ga, gb)
        pl = float(np.linalg.norm(quad.side_point(sb, float(u2)) - pa))
        return g.length - pl, g

    if boundary:
        u2 = float(u2_init)
        _, g = mismatch(u2)
    else:
        u2 = float(np.clip(u2_init, 1e-6, 1 - 1e-6))
        h = 1e-3
        f0, g = mismatch(u2)
        u_prev, f_prev = u2 + h, None
        for _ in range(30):
            if abs(f0) < 1e-9 * max(g.length, 1e-6):
                break
            if f_prev is None:
                f_prev, _ = mismatch(u_prev)
            denom = f0 - f_prev
            if abs(denom) < 1e-18:
                break
            step = f0 * (u2 - u_prev) / denom
            u_prev, f_prev = u2, f0
            u2 = float(np.clip(u2 - step, 0.0, 1.0))
            f0, g = mismatch(u2)
    return GridMember(id=mid, family=family, u1=float(u1), u2=u2,
                      surface_curve=g, planar_start=np.asarray(pa),
                      planar_end=np.asarray(quad.side_point(sb, u2)),
                      boundary=boundary)


def generate_layout(patch: SurfacePatch, quad: PlanarQuad,
                    cladding_blue: CladdingFunction,
                    cladding_pink: CladdingFunction,
                    counts: tuple[int, int] | None = (5, 5),
                    adaptive: bool = False,
                    lamella_width: float = 0.01,
                    max_members: int = 40) -> GridLayout:
    """Sample grid members from the cladding functions and connect them.

    ``counts`` includes the two boundary members per family. Adaptive mode
    inserts members wherever the surface sags more than half the lamella
    width away from the ruled strip between neighbors.
    """
    if cladding_blue.family != "blue" or cladding_pink.family != "pink":
        raise LayoutError("cladding functions passed in the wrong order")
    if not adaptive and (counts[0] < 2 or counts[1] < 2):
        raise LayoutError("need at least 2 members per family")

    members: list[GridMember] = []
    for fam, cf, n in (("blue", cladding_blue, counts[0]),
                       ("pink", cladding_pink, counts[1])):
        u1s = _member_positions(cf, 3 if adaptive else n)
        fam_members = []
        for u1 in u1s:
            boundary = u1 in (0.0, 1.0)
            u2 = u1 if boundary else cf(float(u1))
            fam_members.append(_refined_member(
                patch, quad, fam, float(u1), float(u2), -1, boundary))
        if adaptive:
            fam_members = _adaptive_densify(patch, quad, cf, fam_members,
                                            lamella_width, max_members)
        members.extend(fam_members)
    for i, m in enumerate(members):
        m.id = i

    connections = _compute_connections(patch, members)
    alpha = _deployed_corner_angle(patch)
    return GridLayout(members=members, connections=connections,
                      alpha_bar=quad.alpha_bar, alpha_deployed=alpha)


def _member_positions(cf: CladdingFunction, n: int) -> list[float]:
    lo, hi = cf.domain
    lo, hi = max(lo, 0.0), min(hi, 1.0)
    inner = np.linspace(lo, hi, n)[1:-1] if n > 2 else []
    return [0.0, *[float(x) for x in inner], 1.0]


def _adaptive_densify(patch, quad, cf, fam_members, lamella_width,
                      max_members):
    """Insert members until the sagitta between neighbors is small."""
    threshold = 0.5 * lamella_width
    lo, hi = cf.domain
    changed = True
    while changed:
        changed = False
        out = [fam_members[0]]
        for a, b in zip(fam_members[:-1], fam_members[1:]):
            sag = _strip_sagitta(patch, a, b)
            u_mid = 0.5 * (a.u1 + b.u1)
            if sag > threshold and lo <= u_mid <= hi:
                mem = _refined_member(patch, quad, a.family, u_mid,
                                      cf(u_mid), -1, False)
                out.append(mem)
                changed = True
            out.append(b)
        fam_members = out
        if len(fam_members) > max_members:
            raise LayoutError(
                f"adaptive layout exceeds {max_members} members per "
                "family; split the patch")
    return fam_members


def _strip_sagitta(patch, mem_a, mem_b) -> float:
    """Deviation of the ruled strip between two members from the surface."""
    ts = np.linspace(0.15, 0.85, 5)
    mids = np.array([0.5 * (mem_a.surface_curve.point_at(t * mem_a.length)
                            + mem_b.surface_curve.point_at(t * mem_b.length))
                     for t in ts])
    return float(closest_distances(patch.mesh, mids).max())


def _deployed_corner_angle(patch: SurfacePatch) -> float:
    a = patch.boundaries[0].tangent_at(0.0)            # along s1 from c1
    b = -patch.boundaries[3].tangent_at(patch.boundaries[3].length)  # along s4
    cosang = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.arccos(np.clip(cosang, -1.0, 1.0)))


# -- connections -------------------------------------------------------------


def _compute_connections(patch: SurfacePatch, members) -> list:
    blues = [m for m in members if m.family == "blue"]
    pinks = [m for m in members if m.family == "pink"]
    connections = []
    cid = 0
    gap_tol = 0.02 * patch.diagonal
    for b in blues:
        for p in pinks:
            pl = _segment_cross_param(
                (b.planar_start, b.planar_end),
                (p.planar_start, p.planar_end), eps=1e-7)
            if pl is None:
                continue
            sb_plan = pl * b.planar_length
            # planar arc length on the pink member
            x = b.planar_start + pl * (b.planar_end - b.planar_start)
            sp_plan = float(np.linalg.norm(x - p.planar_start))
            sb_surf, sp_surf, gap = path_crossing(b.surface_curve,
                                                  p.surface_curve)
            if gap > gap_tol:
                continue
            connections.append(Connection(
                id=cid, blue_id=b.id, pink_id=p.id,
                surface_point=b.surface_curve.point_at(sb_surf),
                planar_point=np.asarray(x),
                s_blue_surface=float(sb_surf), s_blue_planar=float(sb_plan),
                s_pink_surface=float(sp_surf), s_pink_planar=float(sp_plan),
                boundary=b.boundary or p.boundary))
            cid += 1
    return connections


# -- notches -----------------------------------------------------------------


def compute_notches(layout: GridLayout, screw_diameter: float = 0.004,
                    margin: float = 0.001,
                    clearance: float = 0.0002) -> list:
    """Slot specifications per connection.

    Interior connections get stadium slots sized ``|delta| + screw + 2
    margin`` per lamella; boundary connections get plain holes.
    """
    plain = screw_diameter + 2 * margin
    notches = []
    for c in layout.connections:
        if c.boundary:
            db = dp = 0.0
        else:
            db, dp = c.delta_blue, c.delta_pink
        warn = None
        for d, mid in ((db, c.blue_id), (dp, c.pink_id)):
            mlen = layout.member(mid).length
            if abs(d) > 0.1 * mlen:
                warn = (f"slide demand {abs(d):.4g} m exceeds 10% of "
                        f"member {mid} length")
        notches.append(NotchSpec(
            connection_id=c.id, delta_blue=db, delta_pink=dp,
            slot_length_blue=abs(db) + plain,
            slot_length_pink=abs(dp) + plain,
            slot_width=screw_diameter + clearance, warning=warn))
    layout.notches = notches
    return notches


# -- supports ----------------------------------------------------------------


def place_supports(layout: GridLayout, patch: SurfacePatch,
                   min_count: int = 4) -> list:
    """Supports at boundary connections near curvature extrema.

    Normal curvature is sampled along the boundary members' surface
    curves; connections nearest local maxima are selected. On flat
    boundaries (zero curvature) the corner connections are used instead.
    Duplicate anchors (shared seams) are merged.
    """
    bconns = [c for c in layout.connections if c.boundary]
    if len(bconns) < min_count:
        raise LayoutError(
            f"only {len(bconns)} boundary connections; need {min_count}")
    scored = []
    for c in bconns:
        mem = layout.member(c.blue_id if layout.member(c.blue_id).boundary
                            else c.pink_id)
        s = c.s_blue_surface if mem.family == "blue" else c.s_pink_surface
        kappa = _curve_curvature(mem.surface_curve, s)
        corner = (min(s, mem.length - s) < 1e-6 * max(mem.length, 1.0))
        scored.append((kappa, corner, c))
    max_kappa = max(k for k, _, _ in scored)
    if max_kappa < 1e-9:
        chosen = [c for k, corner, c in scored if corner]
    else:
        chosen = [c for k, _, c in
                  sorted(scored, key=lambda t: -t[0])]
    supports = []
    seen_pts = []
    for c in chosen:
        if len(supports) >= max(min_count, 4):
            break
        pt = c.surface_point
        if any(np.linalg.norm(pt - q) < 1e-9 for q in seen_pts):
            continue  # shared seam connection: one support serves both
        seen_pts.append(pt)
        n = _patch_normal_at(patch, pt)
        wedge = float(np.arccos(np.clip(abs(n[2]), -1.0, 1.0)))
        supports.append(Support(connection_id=c.id, point=pt.copy(),
                                normal=n, wedge_angle=wedge))
    if len(supports) < min_count:
        raise LayoutError("too few distinct boundary connections for "
                          f"{min_count} supports")
    layout.supports = supports
    return supports


def _curve_curvature(path: GeodesicPath, s: float) -> float:
    h = max(path.length * 0.02, 1e-9)
    p0 = path.point_at(max(s - h, 0.0))
    p1 = path.point_at(s)
    p2 = path.point_at(min(s + h, path.length))
    a = np.linalg.norm(p1 - p0)
    b = np.linalg.norm(p2 - p1)
    c = np.linalg.norm(p2 - p0)
    area2 = np.linalg.norm(np.cross(p1 - p0, p2 - p0))
    if a * b * c < 1e-30:
        return 0.0
    return float(2.0 * area2 / (a * b * c))


def _patch_normal_at(patch: SurfacePatch, x: np.ndarray) -> np.ndarray:
    from .mesh import MeshPoint
    mp = MeshPoint.locate(patch.mesh, x)
    n = patch.mesh.face_normals[mp.face]
    return n / np.linalg.norm(n)


# -- validation ----------------------------------------------------------------


def validate_layout(layout: GridLayout,
                    length_tol: float = 1e-4,
                    boundary_tol: float = 1e-6) -> ValidationReport:
    """Check the grid conditions and crossing consistency."""
    report = ValidationReport()
    for m in layout.members:
        if abs(m.length - m.planar_length) > length_tol * m.length:
            report.violations.append(
                {"kind": "length-mismatch", "member": m.id,
                 "surface": m.length, "planar": m.planar_length})
    for c in layout.connections:
        if not c.boundary:
            continue
        for fam, mid, ds in (("blue", c.blue_id,
                              c.s_blue_surface - c.s_blue_planar),
                             ("pink", c.pink_id,
                              c.s_pink_surface - c.s_pink_planar)):
            if layout.member(mid).boundary and abs(ds) > boundary_tol:
                report.violations.append(
                    {"kind": "boundary-partial-length", "connection": c.id,
                     "member": mid, "mismatch": ds})
    # each blue x pink pair may cross at most once
    seen = {}
    for c in layout.connections:
        key = (c.blue_id, c.pink_id)
        if key in seen:
            report.violations.append(
                {"kind": "double-crossing", "pair": list(key)})
        seen[key] = c
    # crossing order along each blue member must match between states
    blues = {m.id for m in layout.members if m.family == "blue"}
    per_blue: dict[int, list] = {b: [] for b in blues}
    for c in layout.connections:
        per_blue[c.blue_id].append(c)
    for b, cs in per_blue.items():
        if len(cs) < 2:
            continue
        order_plan = sorted(cs, key=lambda c: c.s_blue_planar)
        order_surf = sorted(cs, key=lambda c: c.s_blue_surface)
        if [c.id for c in order_plan] != [c.id for c in order_surf]:
            report.violations.append(
                {"kind": "order-inconsistency", "member": b})
    for n in layout.notches:
        if n.warning:
            report.violations.append(
                {"kind": "notch-bound", "connection": n.connection_id,
                 "detail": n.warning})
    return report
