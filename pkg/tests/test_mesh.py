"""Mesh structure, curvature and closest-point oracles."""

import numpy as np
import pytest

from egg.mesh import (MeshPoint, TriangleMesh, closest_distances,
                      gaussian_curvature, load_mesh, save_mesh)
from egg.synth import grid_mesh, icosphere


def test_edge_bookkeeping(flat_grid):
    m = flat_grid
    boundary = set(m.boundary_edges.tolist())
    # every interior edge borders two faces, boundary edges one
    for e in range(len(m.edges)):
        faces = [f for f in m.faces_of_edge(e) if f >= 0]
        assert len(faces) == (1 if e in boundary else 2)


def test_face_areas_sum(flat_grid):
    assert flat_grid.total_area == pytest.approx(1.0, rel=1e-12)


def test_sphere_gaussian_curvature():
    # analytic oracle: K = 1/R^2 everywhere on a sphere
    for r in (1.0, 2.0):
        sph = icosphere(subdivisions=3, radius=r)
        curv = gaussian_curvature(sph)
        K = curv.K[curv.interior]
        assert np.median(K) == pytest.approx(1.0 / r ** 2, rel=0.05)


def test_flat_curvature_zero(flat_grid):
    curv = gaussian_curvature(flat_grid)
    assert abs(curv.K_max) < 1e-9


def test_closest_distances_oracle(flat_grid):
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.1, 0.9, size=(50, 2))
    heights = rng.uniform(-0.5, 0.5, size=50)
    query = np.column_stack([pts, heights])
    d = closest_distances(flat_grid, query)
    # plane z=0: distance is |z| exactly
    np.testing.assert_allclose(d, np.abs(heights), atol=1e-12)


def test_meshpoint_locate(flat_grid):
    p = MeshPoint.locate(flat_grid, np.array([0.3, 0.4, 0.2]))
    np.testing.assert_allclose(p.position(flat_grid)[:2], [0.3, 0.4],
                               atol=1e-12)


def test_obj_round_trip(tmp_path, flat_grid):
    fn = tmp_path / "m.obj"
    save_mesh(flat_grid, fn)
    m2 = load_mesh(fn)
    np.testing.assert_allclose(m2.vertices, flat_grid.vertices, atol=1e-10)
    np.testing.assert_array_equal(m2.faces, flat_grid.faces)
