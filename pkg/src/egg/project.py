"""Project files and staged pipeline orchestration.

A project is a single JSON file naming the input mesh, the four corner
picks, the free corner angle, layout parameters, section, material and
scale.  Stage results (patch, distance maps, layout, simulation state)
are cached on disk next to the project and re-used while the hash of
their upstream inputs is unchanged.
"""

from __future__ import annotations

import hashlib
import json
import os
import pickle
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cladding import (feasible_alpha_domain, matched_curves,
                       planar_distance_evaluator, surface_distance_map)
from .layout import (compute_notches, generate_layout, place_supports,
                     validate_layout)
from .mesh import MeshPoint, load_mesh
from .patch import (build_patch, build_planar_quad, feasibility_check,
                    suggest_split, uniqueness_check)
from .scaling import MATERIALS, LamellaSection
from .simulation import (build_rod_network, deploy, deviation, make_nudge,
                         make_supports)

__all__ = ["Project", "ProjectError", "load_project",
           "stage_patch", "stage_alpha_domain", "stage_layout",
           "stage_simulate"]


class ProjectError(ValueError):
    pass


@dataclass
class Project:
    path: Path
    mesh_path: Path
    corners: list            # four [x, y, z] picks, snapped to the mesh
    alpha: float | None
    counts: tuple = (5, 5)
    adaptive: bool = False
    section: LamellaSection = field(
        default_factory=lambda: LamellaSection(0.01, 0.001))
    material: str = "limewood"
    f: float = 1.0
    out_dir: Path = Path(".")

    @property
    def cache_dir(self) -> Path:
        env = os.environ.get("EGG_CACHE_DIR")
        return Path(env) if env else self.out_dir / "cache"

    def material_obj(self):
        try:
            return MATERIALS[self.material]
        except KeyError:
            raise ProjectError(
                f"unknown material {self.material!r}; available: "
                f"{sorted(MATERIALS)}") from None

    # -- stage input hashes ------------------------------------------------
    def _hash(self, *parts) -> str:
        h = hashlib.sha256()
        for p in parts:
            h.update(repr(p).encode())
        return h.hexdigest()[:16]

    def patch_key(self) -> str:
        return self._hash(self.mesh_path.read_bytes(), self.corners)

    def layout_key(self) -> str:
        return self._hash(self.patch_key(), self.alpha, self.counts,
                          self.adaptive, self.section.b)

    def sim_key(self, gravity: bool, f: float) -> str:
        return self._hash(self.layout_key(), self.section, self.material,
                          gravity, f)


def load_project(path) -> Project:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ProjectError(f"project file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ProjectError(f"invalid project JSON: {exc}") from None
    try:
        mesh_path = (path.parent / raw["mesh"]).resolve()
        corners = raw["corners"]
    except KeyError as exc:
        raise ProjectError(f"project misses required key {exc}") from None
    if len(corners) != 4:
        raise ProjectError("project needs exactly four corner picks")
    if not mesh_path.exists():
        raise ProjectError(f"mesh file not found: {mesh_path}")
    sec = raw.get("section", {})
    out_dir = (path.parent / raw.get("out_dir", "out")).resolve()
    out_dir.mkdir(parents=True, exist_ok=True)
    return Project(
        path=path, mesh_path=mesh_path, corners=corners,
        alpha=raw.get("alpha"),
        counts=tuple(raw.get("counts", (5, 5))),
        adaptive=bool(raw.get("adaptive", False)),
        section=LamellaSection(b=float(sec.get("b", 0.01)),
                               h=float(sec.get("h", 0.001)),
                               l=float(sec.get("l", 1.0))),
        material=raw.get("material", "limewood"),
        f=float(raw.get("f", 1.0)),
        out_dir=out_dir)


# -- cached stages --------------------------------------------------------------


def _cached(project: Project, name: str, key: str, builder):
    """Load ``name`` from the stage cache when its input hash matches,
    else rebuild and store."""
    cdir = project.cache_dir
    cdir.mkdir(parents=True, exist_ok=True)
    fn = cdir / f"{name}-{key}.pkl"
    if fn.exists():
        with open(fn, "rb") as fh:
            return pickle.load(fh)
    value = builder()
    with open(fn, "wb") as fh:
        pickle.dump(value, fh)
    return value


def stage_patch(project: Project):
    """Mesh + corner picks -> surface patch."""
    def build():
        mesh = load_mesh(project.mesh_path)
        picks = [MeshPoint.locate(mesh, np.asarray(c, dtype=float))
                 for c in project.corners]
        return build_patch(mesh, picks)
    return _cached(project, "patch", project.patch_key(), build)


def stage_check(project: Project):
    """Feasibility + uniqueness screening; returns (feas, uniq, split)."""
    patch = stage_patch(project)
    feas = feasibility_check(patch)
    uniq = uniqueness_check(patch)
    split = None
    if not uniq.passed:
        split = suggest_split(patch)
    return feas, uniq, split


def stage_alpha_domain(project: Project):
    patch = stage_patch(project)
    def build():
        return feasible_alpha_domain(patch,
                                     cache_dir=str(project.cache_dir))
    return _cached(project, "alphadomain", project.patch_key(), build)


def stage_layout(project: Project):
    """Patch + alpha -> validated grid layout (with notches, supports)."""
    if project.alpha is None:
        raise ProjectError("project has no alpha; run check and pick one")
    patch = stage_patch(project)
    domain = stage_alpha_domain(project)
    if not domain.contains(project.alpha):
        raise ProjectError(
            f"alpha={project.alpha:.4f} outside the feasible domain "
            f"{[[round(a, 4), round(b, 4)] for a, b in domain.intervals]}")
    def build():
        quad = build_planar_quad(patch.side_lengths, project.alpha)
        cdir = str(project.cache_dir)
        curves = {}
        for fam in ("blue", "pink"):
            dmap = surface_distance_map(patch, fam, cache_dir=cdir)
            curves[fam] = matched_curves(
                dmap, planar_distance_evaluator(quad, fam), project.alpha)
        layout = generate_layout(patch, quad, curves["blue"],
                                 curves["pink"], counts=project.counts,
                                 adaptive=project.adaptive,
                                 lamella_width=project.section.b)
        compute_notches(layout)
        place_supports(layout, patch)
        return layout, quad
    layout, quad = _cached(project, "layout", project.layout_key(), build)
    report = validate_layout(layout)
    return layout, quad, report


def stage_simulate(project: Project, gravity: bool = False,
                   f: float | None = None):
    """Layout -> deployed state + deviation statistics."""
    patch = stage_patch(project)
    layout, _, report = stage_layout(project)
    if not report.ok:
        raise ProjectError("layout validation failed: "
                           + "; ".join(map(str, report.violations)))
    f = project.f if f is None else f
    def build():
        net = build_rod_network(layout, (project.section.b,
                                         project.section.h),
                                project.material_obj(),
                                segment_target=2 * project.section.b, f=f)
        sups = make_supports(net, layout, f=f)
        nudge = make_nudge(net, layout, f=f)
        state = deploy(net, sups, gravity=gravity, nudge=nudge)
        stats = deviation(state, patch, f=f)
        return state, stats
    return _cached(project, "sim", project.sim_key(gravity, f), build)
