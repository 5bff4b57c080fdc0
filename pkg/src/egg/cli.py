"""Command-line entry points for the full design pipeline.

``egg check|layout|simulate|scale-study|materials|export|serve`` — each
command reads one project JSON file (``--project``) and writes its
artifacts into the project's output directory.

Exit codes: 0 success, 1 failed screening/validation, 2 usage error,
3 simulation non-convergence, 4 oversize part in export.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict

import click

from .fabrication import (FabricationError, bill_of_materials,
                          export_cut_plan, export_stickers, export_supports,
                          write_bom)
from .project import (Project, ProjectError, load_project, stage_alpha_domain,
                      stage_check, stage_layout, stage_patch, stage_simulate)
from .scaling import (MATERIALS, material_comparison, scale_study,
                      write_material_csv, write_scale_csv)
from .simulation import SimulationError


def _load(path) -> Project:
    try:
        return load_project(path)
    except ProjectError as exc:
        raise click.UsageError(str(exc))


def _write(project, name, payload):
    fn = project.out_dir / name
    fn.write_text(json.dumps(payload, indent=2))
    click.echo(f"wrote {fn}")


@click.group()
def main():
    """Design-to-fabrication pipeline for deployable elastic grids."""


@main.command()
@click.option("--project", "project_path", required=True,
              type=click.Path(), help="project JSON file")
def check(project_path):
    """Feasibility and uniqueness screening of the surface patch."""
    project = _load(project_path)
    feas, uniq, split = stage_check(project)
    domain = stage_alpha_domain(project)
    payload = {"feasibility": feas.to_json(), "uniqueness": uniq.to_json(),
               "alpha_domain": domain.to_json()}
    if split is not None:
        payload["suggested_split"] = split.to_json()
    _write(project, "check.json", payload)
    click.echo(json.dumps(payload["alpha_domain"], indent=2))
    if not (feas.feasible and uniq.passed):
        if split is not None:
            click.echo("uniqueness screening failed; a split along the "
                       "suggested geodesic is recommended", err=True)
        sys.exit(1)


@main.command()
@click.option("--project", "project_path", required=True, type=click.Path())
@click.option("--alpha", type=float, default=None,
              help="free corner angle (rad); overrides the project value")
def layout(project_path, alpha):
    """Generate the grid layout, notches and supports."""
    project = _load(project_path)
    if alpha is not None:
        project.alpha = alpha
    try:
        lay, quad, report = stage_layout(project)
    except ProjectError as exc:
        raise click.ClickException(str(exc))
    if alpha is not None:
        # the project file is the source of truth for later stages
        raw = json.loads(project.path.read_text())
        raw["alpha"] = alpha
        project.path.write_text(json.dumps(raw, indent=2))
    _write(project, "layout.json",
           {"layout": lay.to_json(), "quad": quad.to_json(),
            "validation": report.to_json()})
    if not report.ok:
        for v in report.violations:
            click.echo(f"violation: {v}", err=True)
        sys.exit(1)


@main.command()
@click.option("--project", "project_path", required=True, type=click.Path())
@click.option("--gravity", type=click.Choice(["on", "off"]), default="off")
@click.option("--f", "scale_f", type=float, default=None,
              help="uniform scale factor; overrides the project value")
def simulate(project_path, gravity, scale_f):
    """Deploy the grid and report surface deviation."""
    project = _load(project_path)
    try:
        state, stats = stage_simulate(project, gravity=gravity == "on",
                                      f=scale_f)
    except ProjectError as exc:
        raise click.ClickException(str(exc))
    except SimulationError as exc:
        click.echo(f"simulation did not converge: {exc}", err=True)
        sys.exit(3)
    _write(project, "simulation.json",
           {"gravity": gravity == "on",
            "f": project.f if scale_f is None else scale_f,
            "state": state.to_json(), "deviation": stats.to_json()})
    click.echo(f"NRMSE: {stats.nrmse:.6f} m, mean: {stats.mean:.6f} m")


def _parse_flist(text):
    try:
        values = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise click.UsageError(f"cannot parse scale list {text!r}")
    if not values:
        raise click.UsageError("empty scale-factor list")
    return values


@main.command("scale-study")
@click.option("--project", "project_path", required=True, type=click.Path())
@click.option("--f-list", default="1,2,3,4,5",
              help="comma-separated scale factors")
def scale_study_cmd(project_path, f_list):
    """Deploy across scale factors with gravity off and on; write CSV."""
    project = _load(project_path)
    patch = stage_patch(project)
    lay, _, _ = stage_layout(project)
    report = scale_study(lay, project.section, project.material_obj(),
                         _parse_flist(f_list), patch)
    out = project.out_dir / "scale_study.csv"
    write_scale_csv(report, out)
    click.echo(f"wrote {out}")
    for p in report.points:
        click.echo(f"f={p.f:g} nrmse_off={p.nrmse_off} "
                   f"nrmse_on={p.nrmse_on} collapse={p.collapse}")


@main.command()
@click.option("--project", "project_path", required=True, type=click.Path())
@click.option("--f", "scale_f", type=float, default=5.0)
@click.option("--materials", "names", default=None,
              help="comma-separated material names (default: all)")
def materials(project_path, scale_f, names):
    """Compare lamella materials at a fixed scale; write CSV."""
    project = _load(project_path)
    patch = stage_patch(project)
    lay, _, _ = stage_layout(project)
    if names:
        try:
            mats = [MATERIALS[n.strip()] for n in names.split(",")]
        except KeyError as exc:
            raise click.UsageError(f"unknown material {exc}")
    else:
        mats = list(MATERIALS.values())
    results = material_comparison(lay, project.section, mats, scale_f, patch)
    out = project.out_dir / "materials.csv"
    write_material_csv(results, out)
    click.echo(f"wrote {out}")
    for r in results:
        click.echo(f"{r.material}: nrmse={r.nrmse} collapse={r.collapse}")


@main.command()
@click.option("--project", "project_path", required=True, type=click.Path())
@click.option("--sheet", default="1200x600", help="sheet size in mm, WxH")
@click.option("--kerf", type=float, default=0.0, help="kerf in mm")
def export(project_path, sheet, kerf):
    """Write the cut plan, stickers, supports and bill of materials."""
    project = _load(project_path)
    try:
        sw, sh = (float(v) for v in sheet.lower().split("x"))
    except ValueError:
        raise click.UsageError(f"cannot parse sheet size {sheet!r}")
    try:
        lay, _, report = stage_layout(project)
    except ProjectError as exc:
        raise click.ClickException(str(exc))
    if not report.ok:
        raise click.ClickException("layout validation failed; not exporting")
    out = project.out_dir
    try:
        export_cut_plan(lay, project.section, sheet=(sw, sh), kerf=kerf,
                        path=out / "cut_plan.svg")
    except FabricationError as exc:
        click.echo(str(exc), err=True)
        sys.exit(4)
    export_stickers(lay, project.section.b, path=out / "stickers.svg")
    export_supports(lay, path=out / "supports.json")
    bom = bill_of_materials(lay, project.section, project.material_obj())
    write_bom(bom, out / "bom.json")
    for name in ("cut_plan.svg", "stickers.svg", "supports.json",
                 "bom.json"):
        click.echo(f"wrote {out / name}")


@main.command()
@click.option("--project", "project_path", required=True, type=click.Path())
@click.option("--port", type=int, default=8321)
@click.option("--host", default="127.0.0.1")
def serve(project_path, port, host):
    """Serve the project over a local JSON API (used by the studio UI)."""
    import uvicorn

    from .service import create_app
    project = _load(project_path)
    uvicorn.run(create_app(project), host=host, port=port)


if __name__ == "__main__":
    main()
