"""Scaling laws, material data, strength screening and study drivers.

Closed-form relations for how a lamella grid behaves under uniform
geometric scaling by a factor ``f`` (all lengths, widths and thicknesses
multiplied by ``f``), a small database of candidate lamella materials,
and the drivers that sweep deployment simulations over scale factors or
materials.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .simulation import (Material, SimulationError, build_rod_network,
                         deploy, deviation, make_nudge, make_supports)

__all__ = [
    "LamellaSection", "FrictionPair", "ScalePoint", "ScalingReport",
    "MaterialResult", "MATERIALS", "FRICTION_PAIRS",
    "bending_stress", "self_weight", "specific_modulus", "strength_check",
    "scale_study", "material_comparison",
    "write_scale_csv", "write_material_csv",
]


# -- lamella cross-section -----------------------------------------------------


@dataclass(frozen=True)
class LamellaSection:
    """Rectangular lamella cross-section: width ``b``, thickness ``h``,
    reference member length ``l`` (all metres).

    Thin lamellas bend easily about their weak axis while staying stiff
    in-plane; that separation requires ``h <= b / 5``.
    """

    b: float
    h: float
    l: float = 1.0

    def __post_init__(self):
        if min(self.b, self.h, self.l) <= 0:
            raise ValueError("section dimensions must be positive")
        if self.h > self.b / 5 + 1e-12:
            raise ValueError(
                f"lamella thickness h={self.h} exceeds b/5={self.b / 5}; "
                "thin-strip behaviour is lost")

    @property
    def I_weak(self) -> float:
        """Second moment of area about the weak (flat) axis (m^4)."""
        return self.b * self.h ** 3 / 12.0

    def scaled(self, f: float) -> "LamellaSection":
        return LamellaSection(self.b * f, self.h * f, self.l * f)


@dataclass(frozen=True)
class FrictionPair:
    """Static and sliding friction coefficients of a contact pairing."""

    pair: str
    mu_static: float
    mu_sliding: float

    def __post_init__(self):
        if not (self.mu_static >= self.mu_sliding > 0):
            raise ValueError("need mu_static >= mu_sliding > 0")


# Empirical friction coefficients for the contact pairings that occur in
# an assembled grid (the plywood tested is poplar).
FRICTION_PAIRS = {
    "plywood-plywood": FrictionPair("plywood-plywood", 0.436, 0.273),
    "ptfe-ptfe": FrictionPair("ptfe-ptfe", 0.163, 0.091),
    "plywood-steel": FrictionPair("plywood-steel", 0.252, 0.203),
}


# Candidate lamella materials.  The three wood entries are measured values
# (E in Pa, rho in kg/m^3); the GFRP entry is a generic engineering
# placeholder, not a measured value, and is flagged as such in its note.
MATERIALS = {
    "limewood": Material(
        name="limewood", E=9.1e9, rho=500.0, sigma_allow=None,
        note="parallel to fibre"),
    "birch-plywood-perp": Material(
        name="birch-plywood-perp", E=4.0e9, rho=650.0, sigma_allow=None,
        note="perpendicular to fibre"),
    "poplar-plywood-par": Material(
        name="poplar-plywood-par", E=7.6e9, rho=430.0, sigma_allow=None,
        note="parallel to fibre"),
    "gfrp": Material(
        name="gfrp", E=25.0e9, rho=1900.0, sigma_allow=None,
        note="generic placeholder values, not measured data"),
}


# -- closed-form scaling laws --------------------------------------------------


def bending_stress(material: Material, kappa: float, h: float) -> float:
    """Maximum normal stress from bending a lamella of thickness ``h``
    to curvature ``kappa``: sigma = E * kappa * h / 2.

    Under uniform scaling curvature drops as 1/f while h grows as f, so
    the stress is scale-invariant.
    """
    if kappa < 0 or h <= 0:
        raise ValueError("kappa must be >= 0 and h > 0")
    return material.E * kappa * h / 2.0


def self_weight(section: LamellaSection, f: float, rho: float,
                g: float = 9.81) -> float:
    """Weight (N) of one member at scale ``f``: h*b*l*f^3*rho*g."""
    if f < 0 or rho <= 0 or g <= 0:
        raise ValueError("f must be >= 0, rho and g positive")
    return section.h * section.b * section.l * f ** 3 * rho * g


def specific_modulus(material: Material) -> float:
    """Stiffness-to-weight ratio E/rho (m^2/s^2), the primary criterion
    for choosing a lamella material at large scale."""
    return material.E / material.rho


def strength_check(material: Material, kappa_max: float, h: float):
    """Compare peak bending stress against the allowable stress.

    Returns ``(passed, stress)``; ``passed`` is ``None`` when the
    material carries no allowable stress (indeterminate).
    """
    stress = bending_stress(material, kappa_max, h) if kappa_max > 0 else 0.0
    if material.sigma_allow is None:
        return None, stress
    return stress <= material.sigma_allow, stress


# -- study drivers -------------------------------------------------------------


@dataclass
class ScalePoint:
    f: float
    sigma_b_max: float
    self_weight_n: float
    nrmse_off: float | None
    nrmse_on: float | None
    collapse: bool
    note: str = ""


@dataclass
class ScalingReport:
    material: str
    section: LamellaSection
    points: list = field(default_factory=list)

    def to_rows(self):
        return [(p.f, p.sigma_b_max, p.self_weight_n,
                 "" if p.nrmse_off is None else p.nrmse_off,
                 "" if p.nrmse_on is None else p.nrmse_on,
                 int(p.collapse), p.note) for p in self.points]


def _scaled_warm_start(net, state, f_ratio: float):
    """Pack a deployed state, geometrically scaled, as a warm start."""
    positions = [P * f_ratio for P in state.positions]
    slides = state.slides * f_ratio
    return net.pack(positions, state.thetas, slides)


def _deploy_once(layout, section, material, f, gravity, patch,
                 segment_target, steps, x0=None):
    net = build_rod_network(layout, (section.b, section.h), material,
                            segment_target=segment_target, f=f)
    sups = make_supports(net, layout, f=f)
    nudge = make_nudge(net, layout, f=f) if x0 is None else None
    state = deploy(net, sups, gravity=gravity, steps=steps, nudge=nudge,
                   x0=x0)
    stats = deviation(state, patch, f=f)
    return net, state, stats


def scale_study(layout, section: LamellaSection, material: Material,
                f_list, patch, gravity: str = "both",
                segment_target: float | None = None,
                steps: int = 10) -> ScalingReport:
    """Deploy the grid at each scale factor with gravity off and/or on.

    Gravity-off solutions are geometrically self-similar, so each point
    warm-starts from the previous one; the gravity-on runs warm-start
    from the same scale's gravity-off solution and from neighbouring
    gravity-on solutions, keeping the most accurate deployment found.
    A deployment that fails to converge, or whose gravity-on error
    exceeds five times the gravity-off error, is recorded as a collapse
    at that scale.
    """
    if segment_target is None:
        segment_target = 2.0 * section.b
    f_list = sorted(float(f) for f in f_list)
    report = ScalingReport(material=material.name, section=section)

    # forward gravity-off chain: each point warm-starts from the last
    off: dict[float, tuple] = {}   # f -> (net, state, stats)
    notes: dict[float, str] = {}
    prev = None   # (f, state)
    for f in f_list:
        net = build_rod_network(layout, (section.b, section.h), material,
                                segment_target=segment_target, f=f)
        x0 = (_scaled_warm_start(net, prev[1], f / prev[0])
              if prev is not None else None)
        try:
            net, state_off, stats_off = _deploy_once(
                layout, section, material, f, False, patch,
                segment_target, steps, x0=x0)
            if x0 is None:
                # re-polish the cold-started anchor point once so every
                # point in the series reaches warm-start convergence depth
                x1 = net.pack(state_off.positions, state_off.thetas,
                              state_off.slides)
                net, state_off, stats_off = _deploy_once(
                    layout, section, material, f, False, patch,
                    segment_target, steps, x0=x1)
            off[f] = (net, state_off, stats_off)
            prev = (f, state_off)
        except SimulationError as exc:
            notes[f] = f"gravity-off: {exc}"

    # backward equalization: successive warm starts optimize a little
    # deeper at every link, so the chain's tail is converged further than
    # its head.  Without gravity the equilibria are exactly self-similar;
    # re-polishing every earlier point from the deepest solution, rescaled,
    # brings the whole series to a common convergence depth.
    if off:
        f_ref = max(off)
        state_ref = off[f_ref][1]
        for f in f_list:
            if f not in off or f == f_ref:
                continue
            net = build_rod_network(layout, (section.b, section.h),
                                    material, segment_target=segment_target,
                                    f=f)
            x0 = _scaled_warm_start(net, state_ref, f / f_ref)
            try:
                net, state_off, stats_off = _deploy_once(
                    layout, section, material, f, False, patch,
                    segment_target, steps, x0=x0)
                if stats_off.nrmse < off[f][2].nrmse:
                    off[f] = (net, state_off, stats_off)
            except SimulationError:
                pass  # keep the forward-chain solution

    # gravity-on series: the equilibrium reached depends on the warm
    # start, so try several per scale (the scale's own gravity-off state
    # and the neighbouring scales' gravity-on solutions, rescaled) and
    # record the most accurate deployment achieved.  Collapsed solutions
    # are never used to seed a neighbour.
    on: dict[float, tuple] = {}        # f -> (state, stats)
    on_notes: dict[float, str] = {}
    if gravity in ("both", "on"):
        def try_on(f, x0, current):
            try:
                _, state, stats = _deploy_once(
                    layout, section, material, f, True, patch,
                    segment_target, steps, x0=x0)
            except SimulationError as exc:
                on_notes.setdefault(f, f"gravity-on: {exc}")
                return current
            if current is None or stats.nrmse < current[1].nrmse:
                return state, stats
            return current

        def healthy(f):
            return f in on and on[f][1].nrmse <= 5.0 * off[f][2].nrmse

        prev = None                    # (f, state) of last healthy point
        for f in f_list:
            if f not in off:
                continue
            net_f, state_off, _ = off[f]
            best = try_on(f, net_f.pack(state_off.positions,
                                        state_off.thetas,
                                        state_off.slides), None)
            if prev is not None:
                best = try_on(
                    f, _scaled_warm_start(net_f, prev[1], f / prev[0]),
                    best)
            if best is not None:
                on[f] = best
                if healthy(f):
                    prev = (f, best[0])
        nxt = None
        for f in reversed(f_list):
            if f in off and nxt is not None:
                on[f] = try_on(
                    f, _scaled_warm_start(off[f][0], nxt[1], f / nxt[0]),
                    on.get(f))
            if f in off and healthy(f):
                nxt = (f, on[f][0])

    kappa_ref = None
    for f in f_list:
        nrmse_off = nrmse_on = None
        collapse = f not in off
        note = notes.get(f, "")
        if f in off:
            net, state_off, stats_off = off[f]
            nrmse_off = stats_off.nrmse
            if kappa_ref is None:
                kappa_ref = state_off.max_curvature(net) * f
        if gravity in ("both", "on") and not collapse:
            if f in on:
                nrmse_on = on[f][1].nrmse
                if nrmse_off and nrmse_on > 5.0 * nrmse_off:
                    collapse = True
                    note = "gravity-on error exceeds 5x gravity-off"
            else:
                collapse = True
                note = on_notes.get(f, "gravity-on: no converged solution")
        kappa = kappa_ref / f if kappa_ref else 0.0
        report.points.append(ScalePoint(
            f=f,
            sigma_b_max=bending_stress(material, kappa, section.h * f),
            self_weight_n=self_weight(section, f, material.rho),
            nrmse_off=nrmse_off, nrmse_on=nrmse_on,
            collapse=collapse, note=note))
    return report


@dataclass
class MaterialResult:
    material: str
    specific_modulus: float
    nrmse: float | None
    collapse: bool
    note: str = ""


def material_comparison(layout, section: LamellaSection, materials,
                        f: float, patch,
                        segment_target: float | None = None,
                        steps: int = 10) -> list:
    """Deploy with gravity at a fixed scale once per material; results
    are sorted by error, best first.  Non-convergence counts as collapse
    and sorts last."""
    if len(materials) < 2:
        raise ValueError("need at least two materials to compare")
    if segment_target is None:
        segment_target = 2.0 * section.b
    out = []
    warm = None
    for mat in materials:
        try:
            x0 = None
            if warm is not None:
                net = build_rod_network(layout, (section.b, section.h), mat,
                                        segment_target=segment_target, f=f)
                x0 = net.pack(warm.positions, warm.thetas, warm.slides)
            _, state, stats = _deploy_once(
                layout, section, mat, f, True, patch, segment_target,
                steps, x0=x0)
            if warm is None:
                warm = state
            out.append(MaterialResult(mat.name, specific_modulus(mat),
                                      stats.nrmse, False))
        except SimulationError as exc:
            out.append(MaterialResult(mat.name, specific_modulus(mat),
                                      None, True, str(exc)))
    out.sort(key=lambda r: (r.collapse, math.inf if r.nrmse is None
                            else r.nrmse))
    return out


# -- CSV output ----------------------------------------------------------------


def write_scale_csv(report: ScalingReport, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f", "sigma_b_max_pa", "self_weight_n",
                    "nrmse_off_m", "nrmse_on_m", "collapse", "note"])
        w.writerows(report.to_rows())


def write_material_csv(results, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["material", "specific_modulus_m2_s2", "nrmse_m",
                    "collapse", "note"])
        for r in results:
            w.writerow([r.material, r.specific_modulus,
                        "" if r.nrmse is None else r.nrmse,
                        int(r.collapse), r.note])
