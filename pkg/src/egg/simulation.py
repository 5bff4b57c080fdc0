"""Quasi-static deployment simulation of the assembled grid.

Each member is a discrete elastic rod: centerline vertices plus one
material-frame twist angle per edge, measured against per-edge reference
frames that are parallel-transported between continuation increments.
Rods are tied at connections by stiff penalty couplings whose tangential
anchors can slide within their notch intervals (bound-constrained DOFs).
Lamella anisotropy enters through the two bending stiffnesses and the
screw-normal alignment penalty. Deployment is a continuation: support
anchor points move from their planar positions to their spatial targets
while the total energy is minimized at every increment.

All penalty weights are proportional to E times a section length, so every
energy term scales with the cube of a uniform geometric scale factor; with
gravity off the converged shape is scale-invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .mesh import closest_distances
from .patch import SurfacePatch


class SimulationError(RuntimeError):
    pass


@dataclass
class Material:
    name: str
    E: float                   # Pa
    rho: float                 # kg/m^3
    sigma_allow: float | None = None
    note: str = ""

    @property
    def specific_modulus(self) -> float:
        return self.E / self.rho

    @property
    def G(self) -> float:
        return self.E / 2.6

    def to_json(self) -> dict:
        return {"name": self.name, "E": self.E, "rho": self.rho,
                "lambda": self.specific_modulus,
                "sigma_allow": self.sigma_allow, "note": self.note}


@dataclass
class Rod:
    member_id: int
    rest_vertices: np.ndarray     # (n, 3) straight planar centerline
    rest_lengths: np.ndarray      # (n-1,)
    ref_u: np.ndarray             # (n-1, 3) reference frame axis 1
    ref_v: np.ndarray             # (n-1, 3) reference frame axis 2
    ref_twist: np.ndarray         # (n-2,) frame holonomy per interior vertex
    boundary: bool

    @property
    def n(self) -> int:
        return len(self.rest_vertices)

    @property
    def arcs(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.rest_lengths)])


@dataclass
class Coupling:
    connection_id: int
    rod_a: int
    rod_b: int
    s_a: float                 # planar anchor arc on rod a (blue)
    s_b: float
    slide_a: tuple             # (lo, hi) bounds for the slide DOF on rod a
    slide_b: tuple
    boundary: bool


@dataclass
class SupportTarget:
    rod: int
    s: float                   # anchor arc length on the rod
    planar_point: np.ndarray   # (3,)
    target_point: np.ndarray   # (3,)
    target_normal: np.ndarray  # (3,)


@dataclass
class RodNetwork:
    rods: list
    couplings: list
    b: float                   # lamella width (m)
    h: float                   # lamella thickness (m)
    material: Material
    g: float = 9.81

    # -- stiffnesses (all scale as E * length^k so energies go as f^3) --
    @property
    def EI_weak(self) -> float:
        return self.material.E * self.b * self.h ** 3 / 12.0

    @property
    def EI_strong(self) -> float:
        return self.material.E * self.h * self.b ** 3 / 12.0

    @property
    def GJ(self) -> float:
        return self.material.G * self.b * self.h ** 3 / 3.0

    @property
    def k_stretch(self) -> float:
        return self.material.E * self.b * self.h

    # Penalty stiffnesses scale like EI_weak / b**3 so every energy term
    # grows as f**3 under uniform geometric scaling, and so the penalty
    # forces stay within a few decades of the elastic forces (keeping the
    # quasi-Newton problem well conditioned in double precision).
    @property
    def k_couple(self) -> float:
        return 100.0 * self.EI_weak / self.b ** 3

    @property
    def k_align(self) -> float:
        return self.EI_weak / self.b

    @property
    def k_support(self) -> float:
        return 1000.0 * self.EI_weak / self.b ** 3

    @property
    def mass_per_length(self) -> float:
        return self.material.rho * self.b * self.h

    # -- DOF packing -----------------------------------------------------
    def dof_layout(self):
        nx = sum(r.n for r in self.rods) * 3
        nt = sum(r.n - 1 for r in self.rods)
        ns = 2 * len(self.couplings)
        return nx, nt, ns

    def pack(self, positions, thetas, slides) -> np.ndarray:
        return np.concatenate([np.concatenate([p.ravel() for p in positions]),
                               np.concatenate(thetas) if thetas else [],
                               slides])

    def unpack(self, x: np.ndarray):
        positions, thetas = [], []
        off = 0
        for r in self.rods:
            positions.append(x[off:off + 3 * r.n].reshape(r.n, 3))
            off += 3 * r.n
        for r in self.rods:
            thetas.append(x[off:off + r.n - 1])
            off += r.n - 1
        slides = x[off:]
        return positions, thetas, slides

    def rest_dofs(self) -> np.ndarray:
        return self.pack([r.rest_vertices for r in self.rods],
                         [np.zeros(r.n - 1) for r in self.rods],
                         np.zeros(2 * len(self.couplings)))

    def dof_bounds(self):
        nx, nt, ns = self.dof_layout()
        lb = np.full(nx + nt + ns, -np.inf)
        ub = np.full(nx + nt + ns, np.inf)
        for k, c in enumerate(self.couplings):
            lb[nx + nt + 2 * k] = c.slide_a[0]
            ub[nx + nt + 2 * k] = c.slide_a[1]
            lb[nx + nt + 2 * k + 1] = c.slide_b[0]
            ub[nx + nt + 2 * k + 1] = c.slide_b[1]
        return lb, ub


@dataclass
class DeployedState:
    positions: list            # per rod (n, 3)
    thetas: list               # per rod (n-1,)
    slides: np.ndarray
    energy: float
    grad_norm: float
    converged: bool
    support_residual: float = 0.0

    def all_points(self) -> np.ndarray:
        return np.vstack(self.positions)

    def max_curvature(self, network: RodNetwork) -> float:
        worst = 0.0
        for r, P in zip(network.rods, self.positions):
            e = np.diff(P, axis=0)
            ln = np.linalg.norm(e, axis=1)
            if len(e) < 2:
                continue
            t = e / ln[:, None]
            chi = 1.0 + np.einsum("ij,ij->i", t[:-1], t[1:])
            kb = 2.0 * np.cross(t[:-1], t[1:]) / chi[:, None]
            lbar = 0.5 * (ln[:-1] + ln[1:])
            worst = max(worst, float(np.max(
                np.linalg.norm(kb, axis=1) / lbar)))
        return worst


@dataclass
class DeviationStats:
    distances: np.ndarray
    f: float

    @property
    def nrmse(self) -> float:
        return float(np.sqrt(np.mean(self.distances ** 2)) / self.f)

    @property
    def mean(self) -> float:
        return float(np.mean(self.distances))

    def to_json(self) -> dict:
        return {"nrmse": self.nrmse, "mean": self.mean,
                "n": int(len(self.distances)), "f": self.f}


# -- network construction ----------------------------------------------------


def build_rod_network(layout, section: tuple, material: Material,
                      segment_target: float | None = None,
                      f: float = 1.0) -> RodNetwork:
    """Discretize a layout's members into straight planar rods.

    Planar coordinates are embedded in z = 0. ``segment_target`` defaults
    to the lamella width. ``f`` scales all lengths and the section.
    """
    b, h = section[0] * f, section[1] * f
    target = (segment_target or section[0]) * f
    spacing = _min_connection_spacing(layout) * f
    if target > spacing * 3.0:
        raise SimulationError(
            f"segment target {target:.4g} m exceeds connection spacing "
            f"{spacing:.4g} m")
    rods = []
    for m in layout.members:
        L = m.planar_length * f
        nseg = max(int(round(L / target)), 2)
        ts = np.linspace(0.0, 1.0, nseg + 1)
        a = np.append(m.planar_start * f, 0.0)
        bb = np.append(m.planar_end * f, 0.0)
        P = a[None, :] + ts[:, None] * (bb - a)[None, :]
        rods.append(_make_rod(m.id, P, m.boundary))
    couplings = []
    for c in layout.connections:
        if c.boundary:
            lo_a = hi_a = lo_b = hi_b = 0.0
        else:
            da, dp = c.delta_blue * f, c.delta_pink * f
            lo_a, hi_a = min(0.0, da), max(0.0, da)
            lo_b, hi_b = min(0.0, dp), max(0.0, dp)
        couplings.append(Coupling(
            connection_id=c.id, rod_a=c.blue_id, rod_b=c.pink_id,
            s_a=c.s_blue_planar * f, s_b=c.s_pink_planar * f,
            slide_a=(lo_a, hi_a), slide_b=(lo_b, hi_b),
            boundary=c.boundary))
    return RodNetwork(rods=rods, couplings=couplings, b=b, h=h,
                      material=material)


def _make_rod(mid: int, P: np.ndarray, boundary: bool) -> Rod:
    e = np.diff(P, axis=0)
    ln = np.linalg.norm(e, axis=1)
    t = e / ln[:, None]
    # axis 1 = lamella face normal (out of the flat assembly plane), so
    # curvature about axis 2 (the width direction) is the easy bend
    ref = np.array([0.0, 0.0, 1.0])
    u = ref - np.einsum("ij,j->i", t, ref)[:, None] * t
    nu = np.linalg.norm(u, axis=1)
    bad = nu < 1e-8
    if bad.any():
        alt = np.array([1.0, 0.0, 0.0]) - \
            np.einsum("ij,j->i", t[bad], [1.0, 0.0, 0.0])[:, None] * t[bad]
        u[bad] = alt
        nu = np.linalg.norm(u, axis=1)
    u /= nu[:, None]
    v = np.cross(t, u)
    return Rod(member_id=mid, rest_vertices=P.copy(), rest_lengths=ln,
               ref_u=u, ref_v=v, ref_twist=np.zeros(max(len(e) - 1, 0)),
               boundary=boundary)


def _min_connection_spacing(layout) -> float:
    best = np.inf
    per_member: dict[int, list] = {}
    for c in layout.connections:
        per_member.setdefault(c.blue_id, []).append(c.s_blue_planar)
        per_member.setdefault(c.pink_id, []).append(c.s_pink_planar)
    for arcs in per_member.values():
        arcs = sorted(arcs)
        for a, b in zip(arcs[:-1], arcs[1:]):
            if b - a > 1e-12:
                best = min(best, b - a)
    return best if np.isfinite(best) else max(
        m.planar_length for m in layout.members)


# -- energy and gradient -----------------------------------------------------


def _rod_energy_grad(rod: Rod, P, theta, net: RodNetwork, gravity: bool):
    """Elastic + gravity energy of one rod with gradients."""
    n = rod.n
    e = np.diff(P, axis=0)
    ln = np.linalg.norm(e, axis=1)
    t = e / ln[:, None]
    E = 0.0
    gP = np.zeros_like(P)
    gT = np.zeros_like(theta)

    # stretch penalty
    strain = (ln - rod.rest_lengths) / rod.rest_lengths
    E += 0.5 * net.k_stretch * np.sum(strain ** 2 * rod.rest_lengths)
    fs = (net.k_stretch * strain)[:, None] * t
    gP[:-1] -= fs
    gP[1:] += fs

    # material frames per edge
    cth, sth = np.cos(theta), np.sin(theta)
    m1 = cth[:, None] * rod.ref_u + sth[:, None] * rod.ref_v
    m2 = -sth[:, None] * rod.ref_u + cth[:, None] * rod.ref_v

    if n >= 3:
        chi = 1.0 + np.einsum("ij,ij->i", t[:-1], t[1:])
        chi = np.maximum(chi, 1e-12)
        kb = 2.0 * np.cross(t[:-1], t[1:]) / chi[:, None]
        m1bar = 0.5 * (m1[:-1] + m1[1:])
        m2bar = 0.5 * (m2[:-1] + m2[1:])
        k1 = np.einsum("ij,ij->i", kb, m2bar)
        k2 = -np.einsum("ij,ij->i", kb, m1bar)
        lbar = 0.5 * (rod.rest_lengths[:-1] + rod.rest_lengths[1:])
        B1, B2 = net.EI_weak, net.EI_strong
        E += 0.5 * np.sum((B1 * k1 ** 2 + B2 * k2 ** 2) / lbar)

        # d(kappa)/d(edge vectors), Bergou-style closed forms
        ttil = (t[:-1] + t[1:]) / chi[:, None]
        tixm2 = np.cross(t[1:], m2bar)
        timxm2 = np.cross(t[:-1], m2bar)
        tixm1 = np.cross(t[1:], m1bar)
        timxm1 = np.cross(t[:-1], m1bar)
        dk1_dem = (-k1[:, None] * ttil + 2.0 * tixm2 / chi[:, None]) \
            / ln[:-1, None]
        dk1_de = (-k1[:, None] * ttil - 2.0 * timxm2 / chi[:, None]) \
            / ln[1:, None]
        dk2_dem = (k2[:, None] * -ttil - 2.0 * tixm1 / chi[:, None]) \
            / ln[:-1, None]
        dk2_de = (k2[:, None] * -ttil + 2.0 * timxm1 / chi[:, None]) \
            / ln[1:, None]
        w1 = (B1 * k1 / lbar)[:, None]
        w2 = (B2 * k2 / lbar)[:, None]
        g_em = w1 * dk1_dem + w2 * dk2_dem   # d/d e_{i-1}
        g_e = w1 * dk1_de + w2 * dk2_de      # d/d e_i
        np.add.at(gP, np.arange(0, n - 2), -g_em)
        np.add.at(gP, np.arange(1, n - 1), g_em - g_e)
        np.add.at(gP, np.arange(2, n), g_e)

        # d(kappa)/d(theta): dm1/dth = m2, dm2/dth = -m1
        dk1_dth_prev = -0.5 * np.einsum("ij,ij->i", kb, m1[:-1])
        dk1_dth_next = -0.5 * np.einsum("ij,ij->i", kb, m1[1:])
        dk2_dth_prev = -0.5 * np.einsum("ij,ij->i", kb, m2[:-1])
        dk2_dth_next = -0.5 * np.einsum("ij,ij->i", kb, m2[1:])
        gT[:-1] += w1[:, 0] * dk1_dth_prev + w2[:, 0] * dk2_dth_prev
        gT[1:] += w1[:, 0] * dk1_dth_next + w2[:, 0] * dk2_dth_next

        # twist between consecutive edges (reference frames fixed data)
        mtw = theta[1:] - theta[:-1] + rod.ref_twist
        E += 0.5 * net.GJ * np.sum(mtw ** 2 / lbar)
        gtw = net.GJ * mtw / lbar
        gT[1:] += gtw
        gT[:-1] -= gtw

    if gravity:
        vor = np.zeros(n)
        vor[:-1] += 0.5 * rod.rest_lengths
        vor[1:] += 0.5 * rod.rest_lengths
        mass = net.mass_per_length * vor
        E += net.g * np.sum(mass * P[:, 2])
        gP[:, 2] += net.g * mass

    return E, gP, gT, m1


def _anchor(rod: Rod, s: float):
    """(segment index, fraction) of an arc-length anchor on a rod."""
    arcs = rod.arcs
    s = float(np.clip(s, 0.0, arcs[-1]))
    j = int(np.searchsorted(arcs, s, side="right") - 1)
    j = min(j, rod.n - 2)
    frac = (s - arcs[j]) / rod.rest_lengths[j]
    return j, float(np.clip(frac, 0.0, 1.0))


def network_energy(net: RodNetwork, x: np.ndarray, gravity: bool,
                   supports: list | None = None,
                   support_t: float = 1.0,
                   with_grad: bool = True):
    """Total energy and gradient for the packed DOF vector."""
    positions, thetas, slides = net.unpack(x)
    E = 0.0
    gPs = [np.zeros_like(P) for P in positions]
    gTs = [np.zeros_like(th) for th in thetas]
    gS = np.zeros_like(slides)
    m1s = []
    for r, P, th, gP, gT in zip(net.rods, positions, thetas, gPs, gTs):
        Er, gPr, gTr, m1 = _rod_energy_grad(r, P, th, net, gravity)
        E += Er
        gP += gPr
        gT += gTr
        m1s.append(m1)

    for k, c in enumerate(net.couplings):
        ra, rb = net.rods[c.rod_a], net.rods[c.rod_b]
        Pa, Pb = positions[c.rod_a], positions[c.rod_b]
        sa = c.s_a + slides[2 * k]
        sb = c.s_b + slides[2 * k + 1]
        ja, fa = _anchor(ra, sa)
        jb, fb = _anchor(rb, sb)
        xa = (1 - fa) * Pa[ja] + fa * Pa[ja + 1]
        xb = (1 - fb) * Pb[jb] + fb * Pb[jb + 1]
        d = xa - xb
        E += 0.5 * net.k_couple * float(np.dot(d, d))
        gPs[c.rod_a][ja] += net.k_couple * (1 - fa) * d
        gPs[c.rod_a][ja + 1] += net.k_couple * fa * d
        gPs[c.rod_b][jb] -= net.k_couple * (1 - fb) * d
        gPs[c.rod_b][jb + 1] -= net.k_couple * fb * d
        gS[2 * k] += net.k_couple * float(
            np.dot(d, Pa[ja + 1] - Pa[ja])) / ra.rest_lengths[ja]
        gS[2 * k + 1] -= net.k_couple * float(
            np.dot(d, Pb[jb + 1] - Pb[jb])) / rb.rest_lengths[jb]

        # screw-normal alignment: lamella face normals parallel.  The
        # segment is taken at the rest anchor (not the slid one) so the
        # energy stays continuous in the slide DOFs.
        ea = min(_anchor(ra, c.s_a)[0], len(thetas[c.rod_a]) - 1)
        eb = min(_anchor(rb, c.s_b)[0], len(thetas[c.rod_b]) - 1)
        na, nb_ = m1s[c.rod_a][ea], m1s[c.rod_b][eb]
        dot = float(np.dot(na, nb_))
        E += net.k_align * (1.0 - dot * dot)
        # dm1/dtheta = m2
        ra_u, ra_v = net.rods[c.rod_a].ref_u[ea], net.rods[c.rod_a].ref_v[ea]
        rb_u, rb_v = net.rods[c.rod_b].ref_u[eb], net.rods[c.rod_b].ref_v[eb]
        tha = thetas[c.rod_a][ea]
        thb = thetas[c.rod_b][eb]
        m2a = -np.sin(tha) * ra_u + np.cos(tha) * ra_v
        m2b = -np.sin(thb) * rb_u + np.cos(thb) * rb_v
        gTs[c.rod_a][ea] += net.k_align * (-2.0 * dot) * float(
            np.dot(m2a, nb_))
        gTs[c.rod_b][eb] += net.k_align * (-2.0 * dot) * float(
            np.dot(na, m2b))

    if supports:
        for sup in supports:
            r = net.rods[sup.rod]
            P = positions[sup.rod]
            j, fr = _anchor(r, sup.s)
            xcur = (1 - fr) * P[j] + fr * P[j + 1]
            target = (1 - support_t) * sup.planar_point \
                + support_t * sup.target_point
            d = xcur - target
            E += 0.5 * net.k_support * float(np.dot(d, d))
            gPs[sup.rod][j] += net.k_support * (1 - fr) * d
            gPs[sup.rod][j + 1] += net.k_support * fr * d
            # orient the lamella face normal to the target tangent plane
            ej = min(j, len(thetas[sup.rod]) - 1)
            m1 = m1s[sup.rod][ej]
            nt = (1 - support_t) * np.array([0.0, 0.0, 1.0]) \
                + support_t * sup.target_normal
            nt = nt / np.linalg.norm(nt)
            dot = float(np.dot(m1, nt))
            E += net.k_align * (1.0 - dot * dot)
            th = thetas[sup.rod][ej]
            m2 = -np.sin(th) * r.ref_u[ej] + np.cos(th) * r.ref_v[ej]
            gTs[sup.rod][ej] += net.k_align * (-2.0 * dot) * float(
                np.dot(m2, nt))

    if not with_grad:
        return E
    grad = net.pack(gPs, gTs, gS)
    return E, grad


def elastic_energy(net: RodNetwork, x: np.ndarray, gravity: bool = False,
                   supports=None, support_t: float = 1.0) -> float:
    return network_energy(net, x, gravity, supports, support_t,
                          with_grad=False)


def energy_gradient(net: RodNetwork, x: np.ndarray, gravity: bool = False,
                    supports=None, support_t: float = 1.0) -> np.ndarray:
    return network_energy(net, x, gravity, supports, support_t)[1]


# -- reference frame updates ---------------------------------------------------


def _parallel_transport(v, a, b):
    c = np.cross(a, b)
    s2 = float(np.dot(c, c))
    d = float(np.dot(a, b))
    if s2 < 1e-24:
        return v if d > 0 else -v
    return (v * d + np.cross(c, v)
            + c * (np.dot(c, v) * (1 - d) / s2))


def update_reference_frames(net: RodNetwork, x: np.ndarray):
    """Time-parallel transport of reference frames to the current state.

    Twist DOFs are preserved; the per-vertex reference twist is recomputed
    so the stored material frames remain physically identical.
    """
    positions, thetas, _ = net.unpack(x)
    for r, P in zip(net.rods, positions):
        e = np.diff(P, axis=0)
        ln = np.linalg.norm(e, axis=1)
        t_new = e / ln[:, None]
        for i in range(len(e)):
            told = np.cross(r.ref_u[i], r.ref_v[i])
            u = _parallel_transport(r.ref_u[i], told, t_new[i])
            u -= np.dot(u, t_new[i]) * t_new[i]
            u /= np.linalg.norm(u)
            r.ref_u[i] = u
            r.ref_v[i] = np.cross(t_new[i], u)
        # reference twist: angle mismatch of space-transported frames
        for i in range(len(e) - 1):
            u_t = _parallel_transport(r.ref_u[i], t_new[i], t_new[i + 1])
            cosa = float(np.clip(np.dot(u_t, r.ref_u[i + 1]), -1, 1))
            sina = float(np.dot(np.cross(u_t, r.ref_u[i + 1]), t_new[i + 1]))
            r.ref_twist[i] = -np.arctan2(sina, cosa)


# -- deployment ---------------------------------------------------------------


def _projected_norm(x, g, lb, ub, tol=1e-12):
    """Infinity norm of the gradient projected onto the feasible box."""
    pg = g.copy()
    pg[((x - lb) < tol) & (g > 0)] = 0.0
    pg[((ub - x) < tol) & (g < 0)] = 0.0
    return float(np.abs(pg).max())


def deploy(net: RodNetwork, supports: list, gravity: bool = False,
           steps: int = 20, nudge: np.ndarray | None = None,
           gtol_scale: float = 1e-5, maxiter: int = 3000,
           stagnation_tol: float = 2e-3,
           x0: np.ndarray | None = None) -> DeployedState:
    """Continuation deployment to the support targets.

    ``nudge``: optional packed displacement field that biases the buckling
    direction.  It is injected in equal portions alongside the support
    ramp so the bias is present throughout the deployment, not just at
    the start (a one-shot nudge relaxes away before the supports engage).

    After the ramp the state is polished by repeated bounded quasi-Newton
    solves; between solves the reference frames are re-transported to the
    current tangents, which both removes fictitious twist and un-sticks
    stalled line searches.  Convergence is declared when the projected
    gradient is small or the energy has stabilised across a polish pass
    while the supports are met.  Raises on non-convergence, carrying the
    last diagnostics in the message.
    """
    lb, ub = net.dof_bounds()
    bounds = list(zip(lb, ub))
    force_scale = net.EI_weak / net.b ** 2
    gtol = gtol_scale * force_scale
    opts = {"ftol": 1e-15, "maxcor": 50}
    if x0 is not None:
        # warm start near an already-deployed state: the support ramp
        # would pull it back towards the plane, so go straight to polish
        x = np.clip(x0, lb, ub)
        update_reference_frames(net, x)
    else:
        x = net.rest_dofs()
        ts = np.linspace(1.0 / steps, 1.0, steps)
        for t in ts:
            if nudge is not None:
                x = np.clip(x + nudge / steps, lb, ub)
            res = minimize(lambda xx, tt=t: network_energy(net, xx, gravity,
                                                           supports, tt),
                           x, jac=True, method="L-BFGS-B", bounds=bounds,
                           options={**opts, "maxiter": maxiter // 4,
                                    "gtol": 10 * gtol})
            x = res.x
            update_reference_frames(net, x)
    # polishing restarts at full support engagement: each pass refreshes
    # the reference frames, which slightly reshapes the energy landscape
    E_prev = None
    gnorm = np.inf
    stagnant = False
    for it in range(40):
        E, g = network_energy(net, x, gravity, supports, 1.0)
        gnorm = _projected_norm(x, g, lb, ub)
        # never break before the first solve: a warm start may sit below
        # the force threshold while a newly switched-on load (gravity)
        # still has real work to do
        if it > 0 and gnorm < 100 * gtol:
            break
        if E_prev is not None and abs(E_prev - E) < stagnation_tol * abs(E):
            stagnant = True
            break
        E_prev = E
        res = minimize(lambda xx: network_energy(net, xx, gravity,
                                                 supports, 1.0),
                       x, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={**opts, "maxiter": maxiter, "gtol": gtol})
        x = res.x
        update_reference_frames(net, x)
    E, g = network_energy(net, x, gravity, supports, 1.0)
    gnorm = _projected_norm(x, g, lb, ub)
    positions, thetas, slides = net.unpack(x)
    resid = 0.0
    for sup in supports:
        r = net.rods[sup.rod]
        j, fr = _anchor(r, sup.s)
        xc = (1 - fr) * positions[sup.rod][j] + fr * positions[sup.rod][j + 1]
        resid = max(resid, float(np.linalg.norm(xc - sup.target_point)))
    # a stagnated penalty solve still counts if the supports are met
    converged = gnorm < 100 * gtol or (stagnant and resid < 0.1 * net.b)
    state = DeployedState(positions=positions, thetas=thetas, slides=slides,
                          energy=float(E), grad_norm=gnorm,
                          converged=converged, support_residual=resid)
    if not converged:
        raise SimulationError(
            f"deployment did not converge: |grad|={gnorm:.3e} "
            f"(target {gtol:.3e}); last energy {E:.6e}; "
            f"support residual {resid:.3e}")
    return state


def make_supports(net: RodNetwork, layout, f: float = 1.0) -> list:
    """Support targets from the layout's placed supports."""
    conn = {c.id: c for c in layout.connections}
    out = []
    for s in layout.supports:
        c = conn[s.connection_id]
        mem = layout.member(c.blue_id)
        if not mem.boundary:
            mem = layout.member(c.pink_id)
        rod = mem.id
        s_arc = (c.s_blue_planar if mem.family == "blue"
                 else c.s_pink_planar) * f
        planar = np.append(
            layout.member(rod).planar_point_at(s_arc / f) * f, 0.0)
        out.append(SupportTarget(
            rod=rod, s=s_arc, planar_point=planar,
            target_point=s.point * f,
            target_normal=np.asarray(s.normal, dtype=float)))
    return out


def make_nudge(net: RodNetwork, layout, f: float = 1.0,
               amplitude: float = 1.0) -> np.ndarray:
    """Out-of-plane bias field sampled from the design-state members."""
    positions = []
    for r in net.rods:
        m = layout.member(r.member_id)
        arcs = r.arcs / f
        scale = m.length / max(arcs[-1], 1e-30)
        target = np.array([m.surface_curve.point_at(s * scale)
                           for s in arcs]) * f
        disp = np.zeros_like(r.rest_vertices)
        disp[:, 2] = amplitude * (target[:, 2] - target[:, 2].min())
        positions.append(disp)
    return net.pack(positions, [np.zeros(r.n - 1) for r in net.rods],
                    np.zeros(2 * len(net.couplings)))


# -- deviation -----------------------------------------------------------------


def deviation(state: DeployedState, patch: SurfacePatch, f: float = 1.0,
              samples_per_rod: int = 20,
              align: bool = False) -> DeviationStats:
    """Nearest-distance statistics of the deployed centerlines.

    The patch mesh is scaled by ``f`` around the origin to match the
    simulated scale. ``align`` rigidly registers the state to the mesh
    first (for gravity-off scale studies where only shape matters).
    """
    pts = []
    for P in state.positions:
        arcs = np.concatenate([[0.0], np.cumsum(
            np.linalg.norm(np.diff(P, axis=0), axis=1))])
        ss = np.linspace(0.0, arcs[-1], samples_per_rod)
        for s in ss:
            i = min(int(np.searchsorted(arcs, s, side="right")) - 1,
                    len(P) - 2)
            seg = arcs[i + 1] - arcs[i]
            t = 0.0 if seg <= 0 else (s - arcs[i]) / seg
            pts.append((1 - t) * P[i] + t * P[i + 1])
    pts = np.asarray(pts)
    mesh = patch.mesh
    verts = mesh.vertices * f
    from .mesh import TriangleMesh
    scaled = TriangleMesh(verts, mesh.faces) if f != 1.0 else mesh
    if align:
        pts = _rigid_align(pts, scaled)
    d = closest_distances(scaled, pts)
    return DeviationStats(distances=d, f=f)


def _rigid_align(pts: np.ndarray, mesh, iters: int = 12) -> np.ndarray:
    """Small ICP registration of sample points onto the mesh."""
    from .mesh import MeshPoint
    cur = pts.copy()
    for _ in range(iters):
        closest = np.array([MeshPoint.locate(mesh, p).position(mesh)
                            for p in cur])
        mu_p, mu_c = cur.mean(axis=0), closest.mean(axis=0)
        H = (cur - mu_p).T @ (closest - mu_c)
        U, _, Vt = np.linalg.svd(H)
        R = Vt.T @ U.T
        if np.linalg.det(R) < 0:
            Vt[-1] *= -1
            R = Vt.T @ U.T
        cur = (cur - mu_p) @ R.T + mu_c
    return cur
