"""Command-line pipeline and the JSON service."""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from egg.cli import main
from egg.mesh import save_mesh
from egg.project import load_project
from egg.service import create_app


@pytest.fixture(scope="module")
def proj_dir(dome, tmp_path_factory):
    d = tmp_path_factory.mktemp("proj")
    save_mesh(dome, d / "dome.obj")
    (d / "dome.json").write_text(json.dumps({
        "mesh": "dome.obj",
        "corners": [[0.06, 0.08, 0.05], [0.37, 0.08, 0.05],
                    [0.37, 0.49, 0.05], [0.06, 0.49, 0.05]],
        "counts": [4, 4],
        "section": {"b": 0.01, "h": 0.001, "l": 0.45},
        "material": "limewood",
        "f": 1.0,
        "out_dir": "out",
    }))
    return d


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def checked(proj_dir, runner):
    res = runner.invoke(main, ["check", "--project",
                               str(proj_dir / "dome.json")])
    assert res.exit_code == 0, res.output
    return json.loads((proj_dir / "out" / "check.json").read_text())


def test_check_outputs(checked):
    assert checked["feasibility"]["feasible"]
    assert checked["uniqueness"]["pass"]
    assert len(checked["alpha_domain"]["intervals"]) >= 1
    assert "suggested_split" not in checked


def test_check_missing_project(runner, tmp_path):
    res = runner.invoke(main, ["check", "--project",
                               str(tmp_path / "nope.json")])
    assert res.exit_code == 2


def test_check_broken_project(runner, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text(json.dumps({"mesh": "missing.obj"}))
    res = runner.invoke(main, ["check", "--project", str(p)])
    assert res.exit_code == 2


@pytest.fixture(scope="module")
def laid_out(proj_dir, runner, checked):
    lo, hi = checked["alpha_domain"]["intervals"][0]
    alpha = 0.5 * (lo + hi)
    res = runner.invoke(main, ["layout", "--project",
                               str(proj_dir / "dome.json"),
                               "--alpha", str(alpha)])
    assert res.exit_code == 0, res.output
    return alpha


def test_layout_persists_alpha(proj_dir, laid_out):
    raw = json.loads((proj_dir / "dome.json").read_text())
    assert raw["alpha"] == pytest.approx(laid_out)
    data = json.loads((proj_dir / "out" / "layout.json").read_text())
    assert data["validation"]["ok"]
    assert len(data["layout"]["members"]) == 8


def _out_of_domain_alpha(intervals):
    """An angle missing from every served interval (just past the last)."""
    hi = max(b for _, b in intervals)
    gaps = [0.5 * (a1 + b0) for (_, b0), (a1, _)
            in zip(intervals, intervals[1:]) if a1 - b0 > 1e-3]
    return gaps[0] if gaps else hi + 0.05


def test_layout_alpha_out_of_domain(proj_dir, runner, checked):
    bad = _out_of_domain_alpha(checked["alpha_domain"]["intervals"])
    res = runner.invoke(main, ["layout", "--project",
                               str(proj_dir / "dome.json"),
                               "--alpha", str(bad)])
    assert res.exit_code == 1
    assert "domain" in res.output


def test_export(proj_dir, runner, laid_out):
    res = runner.invoke(main, ["export", "--project",
                               str(proj_dir / "dome.json")])
    assert res.exit_code == 0, res.output
    out = proj_dir / "out"
    for name in ("cut_plan.svg", "stickers.svg", "supports.json",
                 "bom.json"):
        assert (out / name).exists()
    bom = json.loads((out / "bom.json").read_text())
    assert bom["lamella_count"] == 8
    assert bom["mass_kg"] > 0


def test_export_oversize_sheet(proj_dir, runner, laid_out):
    res = runner.invoke(main, ["export", "--project",
                               str(proj_dir / "dome.json"),
                               "--sheet", "100x100"])
    assert res.exit_code == 4


def test_export_bad_sheet_spec(proj_dir, runner, laid_out):
    res = runner.invoke(main, ["export", "--project",
                               str(proj_dir / "dome.json"),
                               "--sheet", "wide"])
    assert res.exit_code == 2


# -- service -------------------------------------------------------------------


@pytest.fixture(scope="module")
def client(proj_dir, laid_out):
    project = load_project(proj_dir / "dome.json")
    return TestClient(create_app(project))


def test_service_patch(client):
    data = client.get("/patch").json()
    assert len(data["side_lengths"]) == 4


def test_service_alpha_domain(client):
    data = client.get("/alpha-domain").json()
    assert len(data["intervals"]) >= 1


def test_service_layout_out_of_domain(client):
    intervals = client.get("/alpha-domain").json()["intervals"]
    r = client.post("/layout", json={"alpha": _out_of_domain_alpha(intervals)})
    assert r.status_code == 422
    detail = r.json()["detail"]
    assert detail["message"] == "alpha outside the feasible domain"
    assert len(detail["intervals"]) >= 1


def test_service_layout_ok(client, laid_out):
    r = client.post("/layout", json={"alpha": laid_out})
    assert r.status_code == 200
    body = r.json()
    assert body["validation"]["ok"]
    assert len(body["layout"]["members"]) == 8
    # warm (cached) preview round-trip stays interactive
    t0 = time.perf_counter()
    r = client.post("/layout", json={"alpha": laid_out})
    assert r.status_code == 200
    assert time.perf_counter() - t0 < 1.0


def test_service_unknown_job(client):
    r = client.get("/jobs/job-999")
    assert r.status_code == 404


def test_service_deviation_before_any_job(client):
    r = client.get("/deviation")
    assert r.status_code == 404


def test_service_export(client, proj_dir):
    r = client.get("/export")
    assert r.status_code == 200
    body = r.json()
    assert "1 user unit = 1 mm" in body["files"]["cut_plan.svg"]
    assert body["bom"]["lamella_count"] == 8
    assert body["validation"]["ok"]
