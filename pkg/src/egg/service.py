"""Local JSON service exposing the pipeline to the studio UI.

All heavy computation happens here; clients only render served numbers.
Simulations run as background jobs, at most one at a time per project,
polled via ``GET /jobs/{id}``.
"""

from __future__ import annotations

import itertools
import threading
from queue import Queue

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .fabrication import (FabricationError, bill_of_materials,
                          export_cut_plan, export_stickers, export_supports)
from .layout import compute_notches, generate_layout, place_supports, \
    validate_layout
from .cladding import matched_curves, planar_distance_evaluator, \
    surface_distance_map
from .patch import build_planar_quad
from .project import (Project, ProjectError, stage_alpha_domain, stage_check,
                      stage_layout, stage_patch, stage_simulate)
from .simulation import SimulationError


class LayoutRequest(BaseModel):
    alpha: float
    counts: tuple[int, int] | None = None
    adaptive: bool | None = None


class SimulateRequest(BaseModel):
    gravity: bool = False
    f: float | None = None


def create_app(project: Project) -> FastAPI:
    app = FastAPI(title="elastic grid design service")
    jobs: dict[str, dict] = {}
    job_ids = itertools.count(1)
    queue: Queue = Queue()
    lock = threading.Lock()

    def worker():
        while True:
            job_id = queue.get()
            job = jobs[job_id]
            with lock:
                job["status"] = "running"
            try:
                state, stats = stage_simulate(
                    project, gravity=job["request"]["gravity"],
                    f=job["request"]["f"])
                with lock:
                    job["status"] = "done"
                    job["result"] = {"state": state.to_json(),
                                     "deviation": stats.to_json()}
            except (ProjectError, SimulationError) as exc:
                with lock:
                    job["status"] = "failed"
                    job["error"] = str(exc)

    threading.Thread(target=worker, daemon=True).start()

    @app.get("/patch")
    def get_patch():
        return stage_patch(project).to_json()

    @app.get("/feasibility")
    def get_feasibility():
        feas, uniq, split = stage_check(project)
        payload = {"feasibility": feas.to_json(),
                   "uniqueness": uniq.to_json()}
        if split is not None:
            payload["suggested_split"] = split.to_json()
        return payload

    @app.get("/alpha-domain")
    def get_alpha_domain():
        return stage_alpha_domain(project).to_json()

    @app.post("/layout")
    def post_layout(req: LayoutRequest):
        domain = stage_alpha_domain(project)
        if not domain.contains(req.alpha):
            raise HTTPException(
                status_code=422,
                detail={"message": "alpha outside the feasible domain",
                        "alpha": req.alpha,
                        "intervals": domain.to_json()["intervals"]})
        project.alpha = req.alpha
        if req.counts is not None:
            project.counts = tuple(req.counts)
        if req.adaptive is not None:
            project.adaptive = req.adaptive
        try:
            lay, quad, report = stage_layout(project)
        except ProjectError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"layout": lay.to_json(), "quad": quad.to_json(),
                "validation": report.to_json()}

    @app.post("/simulate")
    def post_simulate(req: SimulateRequest):
        if project.alpha is None:
            raise HTTPException(status_code=422,
                                detail="choose alpha (POST /layout) first")
        job_id = f"job-{next(job_ids)}"
        jobs[job_id] = {"status": "queued",
                        "request": {"gravity": req.gravity,
                                    "f": req.f if req.f is not None
                                    else project.f}}
        queue.put(job_id)
        return {"job_id": job_id, "status": "queued"}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown job {job_id}")
        with lock:
            payload = {"job_id": job_id, "status": job["status"]}
            if job["status"] == "done":
                payload["result"] = job["result"]
            if job["status"] == "failed":
                payload["error"] = job["error"]
        return payload

    @app.get("/deviation")
    def get_deviation():
        done = [j for j in jobs.values() if j["status"] == "done"]
        if not done:
            raise HTTPException(status_code=404,
                                detail="no finished simulation job")
        return done[-1]["result"]["deviation"]

    @app.get("/export")
    def get_export():
        try:
            lay, _, report = stage_layout(project)
        except ProjectError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        out = project.out_dir
        try:
            export_cut_plan(lay, project.section,
                            path=out / "cut_plan.svg")
        except FabricationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        export_stickers(lay, project.section.b, path=out / "stickers.svg")
        export_supports(lay, path=out / "supports.json")
        bom = bill_of_materials(lay, project.section,
                                project.material_obj())
        files = {}
        for name in ("cut_plan.svg", "stickers.svg", "supports.json"):
            files[name] = (out / name).read_text()
        return {"files": files, "bom": bom.to_json(),
                "validation": report.to_json()}

    return app
