"""Distance maps and cladding functions.

A distance map samples geodesic distances between points on opposite
patch boundaries; its planar counterpart is evaluated in closed form on
the quad. Intersecting the two maps (zero set of their difference) gives
the cladding function u1 -> u2 whose members have equal surface and
planar lengths. Sweeping alpha_bar and validating both families yields
the feasible angle domain.

Families: "blue" members run from side s4 to side s2 (bounded by s1 and
s3), "pink" members run from side s1 to side s3.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .geodesic import dijkstra_from, shortest_geodesic
from .mesh import MeshPoint
from .patch import (PlanarQuad, SurfacePatch, alpha_closure_interval,
                    build_planar_quad, _mask_to_intervals)

_FAMILY_SIDES = {"blue": (4, 2), "pink": (1, 3)}


class CladdingError(ValueError):
    pass


@dataclass
class DistanceMap:
    """Sampled geodesic distances between opposite boundaries."""

    family: str
    samples: np.ndarray       # (n, n): D[i, j] = dist(side_a(u1_i), side_b(u2_j))
    u1: np.ndarray
    u2: np.ndarray

    def __call__(self, u1: float, u2: float) -> float:
        return float(_bilinear(self.samples, self.u1, self.u2, u1, u2))

    def eval_u2(self, u1: float, u2: np.ndarray) -> np.ndarray:
        return _bilinear(self.samples, self.u1, self.u2, u1, u2)


def _bilinear(S, xs, ys, x, y):
    x = np.clip(np.asarray(x, dtype=float), xs[0], xs[-1])
    y = np.clip(np.asarray(y, dtype=float), ys[0], ys[-1])
    hx = xs[1] - xs[0]
    hy = ys[1] - ys[0]
    i = np.clip(((x - xs[0]) / hx).astype(int), 0, len(xs) - 2)
    j = np.clip(((y - ys[0]) / hy).astype(int), 0, len(ys) - 2)
    fx = (x - xs[i]) / hx
    fy = (y - ys[j]) / hy
    return ((1 - fx) * (1 - fy) * S[i, j] + fx * (1 - fy) * S[i + 1, j]
            + (1 - fx) * fy * S[i, j + 1] + fx * fy * S[i + 1, j + 1])


@dataclass
class PlanarDistanceMap:
    """Closed-form Euclidean distances on the planar quad."""

    quad: PlanarQuad
    family: str

    def __call__(self, u1, u2):
        a, b = _FAMILY_SIDES[self.family]
        u1 = np.atleast_1d(np.asarray(u1, dtype=float))
        u2 = np.atleast_1d(np.asarray(u2, dtype=float))
        pa = np.array([self.quad.side_point(a, u) for u in u1])
        pb = np.array([self.quad.side_point(b, u) for u in u2])
        d = np.linalg.norm(pa - pb, axis=1)
        return float(d[0]) if d.size == 1 else d


@dataclass
class CladdingFunction:
    """Monotone matching u1 -> u2 with equal-length members."""

    family: str
    alpha_bar: float
    u1: np.ndarray
    u2: np.ndarray
    lengths: np.ndarray       # matched member length at each u1

    def __call__(self, u1: float) -> float:
        return float(np.interp(u1, self.u1, self.u2))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.u1[0]), float(self.u1[-1])

    def to_json(self) -> dict:
        return {"family": self.family, "alpha_bar": self.alpha_bar,
                "u1": self.u1.tolist(), "u2": self.u2.tolist(),
                "lengths": self.lengths.tolist()}


@dataclass
class AlphaDomain:
    intervals: list
    alphas: np.ndarray
    diagnostics: dict = field(default_factory=dict)  # alpha index -> reason

    def contains(self, alpha: float) -> bool:
        return any(a0 <= alpha <= a1 for a0, a1 in self.intervals)

    def to_json(self) -> dict:
        return {"intervals": [list(iv) for iv in self.intervals],
                "alphas": self.alphas.tolist(),
                "diagnostics": {str(k): v for k, v in self.diagnostics.items()}}


# -- distance maps ---------------------------------------------------------


def surface_distance_map(patch: SurfacePatch, family: str, n: int = 65,
                         cache_dir: str | None = None) -> DistanceMap:
    """n x n geodesic distance samples between opposite boundaries."""
    if n < 17:
        raise CladdingError("need at least 17 samples per axis")
    if family not in _FAMILY_SIDES:
        raise CladdingError(f"unknown family {family!r}")
    cache_dir = cache_dir or os.environ.get("EGG_CACHE_DIR")
    key = _map_cache_key(patch, family, n)
    if cache_dir:
        cached = _load_map_cache(os.path.join(cache_dir, key), family, n)
        if cached is not None:
            return cached
    sa, sb = _FAMILY_SIDES[family]
    u = np.linspace(0.0, 1.0, n)
    pts_a = [patch.side_meshpoint(sa, float(x)) for x in u]
    pts_b = [patch.side_meshpoint(sb, float(x)) for x in u]
    D = np.empty((n, n))
    for i, pa in enumerate(pts_a):
        fieldd = dijkstra_from(patch.mesh, pa)
        for j, pb in enumerate(pts_b):
            g = shortest_geodesic(patch.mesh, pa, pb, source_field=fieldd)
            D[i, j] = g.length
    if np.any(D[1:-1, 1:-1] <= 0):
        bad = np.argwhere(D <= 0)
        raise CladdingError(f"non-positive distances at samples {bad[:5]}")
    dm = DistanceMap(family=family, samples=D, u1=u, u2=u)
    if cache_dir:
        _save_map_cache(os.path.join(cache_dir, key), dm)
    return dm


def _map_cache_key(patch: SurfacePatch, family: str, n: int) -> str:
    h = hashlib.sha256()
    h.update(patch.mesh.vertices.tobytes())
    h.update(patch.mesh.faces.tobytes())
    for c in patch.corners:
        h.update(struct.pack("<i", c.face))
        h.update(np.asarray(c.bary).tobytes())
    h.update(f"{family}:{n}".encode())
    return f"dmap_{h.hexdigest()[:24]}.bin"


_MAP_MAGIC = b"EGGDMAP1"


def _save_map_cache(path: str, dm: DistanceMap):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_MAP_MAGIC)
        fh.write(struct.pack("<i", len(dm.u1)))
        fh.write(dm.family.encode().ljust(8, b"\0"))
        fh.write(dm.samples.astype("<f8").tobytes())


def _load_map_cache(path: str, family: str, n: int):
    if not os.path.exists(path):
        return None
    with open(path, "rb") as fh:
        if fh.read(8) != _MAP_MAGIC:
            return None
        (n_file,) = struct.unpack("<i", fh.read(4))
        fam = fh.read(8).rstrip(b"\0").decode()
        if n_file != n or fam != family:
            return None
        S = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
    u = np.linspace(0.0, 1.0, n)
    return DistanceMap(family=family, samples=S.copy(), u1=u, u2=u)


def planar_distance_evaluator(quad: PlanarQuad, family: str) -> PlanarDistanceMap:
    if family not in _FAMILY_SIDES:
        raise CladdingError(f"unknown family {family!r}")
    return PlanarDistanceMap(quad=quad, family=family)


# -- matched curves --------------------------------------------------------


def matched_curves(D: DistanceMap, Dbar: PlanarDistanceMap,
                   alpha_bar: float, n_scan: int = 129,
                   tol: float = 1e-10) -> CladdingFunction:
    """Zero set of D - Dbar extracted per-u1 scanline.

    Raises with a diagnostic flag when a scanline has multiple roots
    (non-monotone), when the zero set is empty, or when the map
    difference is degenerate (identically ~0).
    """
    if D.family != Dbar.family:
        raise CladdingError("distance maps belong to different families")
    scale = float(np.max(D.samples))
    # degeneracy test at the map's own sample nodes (no interpolation error)
    node_diff = np.abs(D.samples
                       - np.array([Dbar(x, D.u2) for x in D.u1]))
    if np.max(node_diff) < 1e-7 * scale:
        raise CladdingError("degenerate: distance maps coincide "
                            "(flat patch, every u2 is a root)")
    u1s = np.linspace(0.0, 1.0, n_scan)
    u2_grid = np.linspace(0.0, 1.0, n_scan)
    roots_u1, roots_u2, lengths = [], [], []
    for u1 in u1s:
        g = D.eval_u2(u1, u2_grid) - Dbar(u1, u2_grid)
        sign = np.sign(g)
        brackets = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        exact = np.nonzero(sign == 0)[0]
        n_roots = len(brackets) + len(exact)
        if n_roots == 0:
            continue
        if n_roots > 1:
            raise CladdingError(
                f"non-monotone: {n_roots} roots on scanline u1={u1:.4f}")
        if len(exact):
            r = float(u2_grid[exact[0]])
        else:
            k = brackets[0]
            lo, hi = u2_grid[k], u2_grid[k + 1]
            glo = g[k]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                gm = float(D.eval_u2(u1, np.array([mid]))[0]
                           - Dbar(u1, mid))
                if glo * gm <= 0:
                    hi = mid
                else:
                    lo, glo = mid, gm
            r = 0.5 * (lo + hi)
        roots_u1.append(float(u1))
        roots_u2.append(r)
        lengths.append(float(D(u1, r)))
    if not roots_u1:
        raise CladdingError("empty-curve: the distance maps do not intersect")
    u1a, u2a = np.asarray(roots_u1), np.asarray(roots_u2)
    d = np.diff(u2a)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise CladdingError("non-monotone: matched curve reverses direction")
    if np.all(d < 0):
        pass  # decreasing matchings are still one-to-one
    return CladdingFunction(family=D.family, alpha_bar=float(alpha_bar),
                            u1=u1a, u2=u2a, lengths=np.asarray(lengths))


# -- feasible angle domain ---------------------------------------------------


def feasible_alpha_domain(patch: SurfacePatch, n_alpha: int = 64,
                          n_map: int = 65, members_per_family: int = 4,
                          alpha_range=None,
                          cache_dir: str | None = None) -> AlphaDomain:
    """Sweep alpha_bar and keep angles where both families clad validly.

    A sample is rejected when either family's curve is non-monotone or
    empty, when two same-family members cross inside the patch (extra
    crossing), or when the blue x pink crossing order differs between the
    planar and surface states (triangle condition).
    """
    a_lo, a_hi = alpha_closure_interval(patch.side_lengths)
    if alpha_range is not None:
        a_lo = max(a_lo, alpha_range[0])
        a_hi = min(a_hi, alpha_range[1])
    pad = 0.01 * (a_hi - a_lo)
    alphas = np.linspace(a_lo + pad, a_hi - pad, n_alpha)
    maps = {fam: surface_distance_map(patch, fam, n_map, cache_dir=cache_dir)
            for fam in ("blue", "pink")}
    ok = np.zeros(n_alpha, dtype=bool)
    diagnostics: dict[int, str] = {}
    for k, a in enumerate(alphas):
        try:
            quad = build_planar_quad(patch.side_lengths, float(a))
            curves = {}
            for fam in ("blue", "pink"):
                curves[fam] = matched_curves(
                    maps[fam], planar_distance_evaluator(quad, fam), float(a))
            reason = _validate_alpha_sample(patch, quad, curves,
                                            members_per_family)
        except CladdingError as exc:
            reason = str(exc).split(":")[0]
        if reason is None:
            ok[k] = True
        else:
            diagnostics[k] = reason
    intervals = _mask_to_intervals(alphas, ok)
    return AlphaDomain(intervals=intervals, alphas=alphas,
                       diagnostics=diagnostics)


def _validate_alpha_sample(patch, quad, curves, m) -> str | None:
    """Extra-crossing and triangle checks on a few members per family."""
    planar_members = {}
    surface_members = {}
    for fam, (sa, sb) in _FAMILY_SIDES.items():
        cf = curves[fam]
        lo, hi = cf.domain
        us = np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), m)
        pl, sf = [], []
        for u in us:
            v = cf(float(u))
            pl.append((quad.side_point(sa, float(u)),
                       quad.side_point(sb, float(v))))
            ga = patch.side_meshpoint(sa, float(u))
            gb = patch.side_meshpoint(sb, float(v))
            sf.append(shortest_geodesic(patch.mesh, ga, gb))
        planar_members[fam] = pl
        surface_members[fam] = sf
    # same-family members must not cross in the planar state
    for fam in ("blue", "pink"):
        pl = planar_members[fam]
        for i in range(len(pl)):
            for j in range(i + 1, len(pl)):
                if _segments_cross(pl[i], pl[j]):
                    return "extra-crossing"
    # blue x pink crossing order must match between the two states
    for i, (bp, bs) in enumerate(zip(planar_members["blue"],
                                     surface_members["blue"])):
        planar_ts, surface_ts = [], []
        for pp, ps in zip(planar_members["pink"], surface_members["pink"]):
            t = _segment_cross_param(bp, pp)
            if t is None:
                continue
            planar_ts.append(t)
            from .geodesic import path_crossing
            s_b, _, gap = path_crossing(bs, ps)
            if gap > 0.05 * patch.diagonal:
                return "triangle"
            surface_ts.append(s_b / bs.length)
        if len(planar_ts) >= 2:
            order_p = np.argsort(planar_ts)
            order_s = np.argsort(surface_ts)
            if not np.array_equal(order_p, order_s):
                return "triangle"
    return None


def _segments_cross(seg1, seg2, eps=1e-9) -> bool:
    t = _segment_cross_param(seg1, seg2, eps)
    return t is not None and eps < t < 1 - eps


def _segment_cross_param(seg1, seg2, eps=1e-9):
    (a, b), (c, d) = seg1, seg2
    r = b - a
    s = d - c
    den = r[0] * s[1] - r[1] * s[0]
    if abs(den) < 1e-15:
        return None
    t = ((c - a)[0] * s[1] - (c - a)[1] * s[0]) / den
    u = ((c - a)[0] * r[1] - (c - a)[1] * r[0]) / den
    if -eps <= t <= 1 + eps and -eps <= u <= 1 + eps:
        return float(t)
    return None
