"""Patch framing, planar quad closure, feasibility screening, splitting."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from egg.geodesic import shortest_geodesic
from egg.mesh import MeshPoint
from egg.patch import (PatchError, alpha_closure_interval, build_patch,
                       build_planar_quad, coverage_gap, feasibility_check,
                       split_patch, uniqueness_check)
from egg.synth import grid_mesh


def test_unit_square_diagonals():
    q = build_planar_quad([1, 1, 1, 1], np.pi / 2)
    assert q.diag_e == pytest.approx(np.sqrt(2), abs=1e-12)
    assert q.diag_f == pytest.approx(np.sqrt(2), abs=1e-12)


def test_rhombus_diagonals():
    q = build_planar_quad([1, 1, 1, 1], np.pi / 3)
    assert q.diag_e == pytest.approx(1.0, abs=1e-12)
    assert q.diag_f == pytest.approx(np.sqrt(3), abs=1e-12)


def test_closure_interval_square():
    lo, hi = alpha_closure_interval([1, 1, 1, 1])
    assert lo == pytest.approx(0.0, abs=1e-12)
    assert hi == pytest.approx(np.pi, abs=1e-12)


def test_closure_interval_impossible():
    with pytest.raises(PatchError):
        alpha_closure_interval([5, 1, 1, 1])


def test_quad_outside_interval_rejected():
    lo, hi = alpha_closure_interval([1.0, 0.8, 1.1, 0.9])
    with pytest.raises(PatchError):
        build_planar_quad([1.0, 0.8, 1.1, 0.9], hi + 0.05)
    with pytest.raises(PatchError):
        build_planar_quad([1.0, 0.8, 1.1, 0.9], -0.1)


@settings(max_examples=40, deadline=None)
@given(sides=st.lists(st.floats(0.3, 2.0), min_size=4, max_size=4),
       t=st.floats(0.05, 0.9))
def test_quad_closure_property(sides, t):
    try:
        lo, hi = alpha_closure_interval(sides)
    except PatchError:
        return
    pad = 1e-4 * (hi - lo)
    a0 = lo + pad + t * (hi - lo - 2 * pad)
    a1 = a0 + 0.5 * (hi - pad - a0)
    q0 = build_planar_quad(sides, a0)
    # the constructed vertices reproduce all four side lengths
    v = q0.vertices
    for i in range(4):
        got = np.linalg.norm(v[(i + 1) % 4] - v[i])
        assert got == pytest.approx(sides[i], rel=1e-9)
    # e = |c2 - c4| obeys the law of cosines at corner 1, so it is
    # strictly increasing as the corner opens
    e_exact = np.sqrt(sides[0] ** 2 + sides[3] ** 2
                      - 2 * sides[0] * sides[3] * np.cos(a0))
    assert q0.diag_e == pytest.approx(e_exact, rel=1e-12)
    if a1 - a0 > 1e-6:
        assert build_planar_quad(sides, a1).diag_e > q0.diag_e


def test_build_patch_flat_square(flat_grid):
    corners = [MeshPoint.locate(flat_grid, np.array([x, y, 0.0]))
               for x, y in [(0.1, 0.1), (0.9, 0.1), (0.9, 0.9), (0.1, 0.9)]]
    p = build_patch(flat_grid, corners)
    np.testing.assert_allclose(p.side_lengths, 0.8, atol=1e-9)
    assert p.diag_e == pytest.approx(0.8 * np.sqrt(2), abs=1e-9)
    assert p.diag_f == pytest.approx(0.8 * np.sqrt(2), abs=1e-9)


def test_build_patch_rejects_bowtie(flat_grid):
    corners = [MeshPoint.locate(flat_grid, np.array([x, y, 0.0]))
               for x, y in [(0.1, 0.1), (0.9, 0.9), (0.9, 0.1), (0.1, 0.9)]]
    with pytest.raises(PatchError):
        build_patch(flat_grid, corners)


def test_build_patch_rejects_reflex(flat_grid):
    corners = [MeshPoint.locate(flat_grid, np.array([x, y, 0.0]))
               for x, y in [(0.1, 0.1), (0.9, 0.1), (0.45, 0.45), (0.1, 0.9)]]
    with pytest.raises(PatchError):
        build_patch(flat_grid, corners)


def test_flat_patch_degenerate_match(flat_grid):
    # on a flat surface one angle reproduces both patch diagonals at
    # once: deployment there is the identity (zero diagonal defect)
    corners = [MeshPoint.locate(flat_grid, np.array([x, y, 0.0]))
               for x, y in [(0.1, 0.1), (0.9, 0.15), (0.85, 0.9), (0.15, 0.8)]]
    p = build_patch(flat_grid, corners)
    res = feasibility_check(p, n_samples=400)
    defect = np.hypot(res.e - res.e_bar, res.f - res.f_bar)
    assert defect.min() < 1e-3 * p.diagonal


def test_dome_patch_feasible(dome_patch, dome_alpha):
    res = feasibility_check(dome_patch, n_samples=50)
    assert res.feasible
    assert any(lo <= dome_alpha <= hi for lo, hi in res.feasible_intervals)


def test_dome_uniqueness_passes(dome_patch):
    rep = uniqueness_check(dome_patch)
    assert rep.passed
    assert rep.longest_geodesic < rep.bound


def test_split_partitions_area(dome_patch):
    a = dome_patch.side_meshpoint(4, 0.5)
    b = dome_patch.side_meshpoint(2, 0.5)
    g = shortest_geodesic(dome_patch.mesh, a, b)
    p1, p2 = split_patch(dome_patch, g)
    assert p1.area + p2.area == pytest.approx(dome_patch.area, rel=1e-12)
    assert len(np.intersect1d(p1.face_set, p2.face_set)) == 0


def test_split_rejects_same_side(dome_patch):
    a = dome_patch.side_meshpoint(1, 0.3)
    b = dome_patch.side_meshpoint(1, 0.7)
    g = shortest_geodesic(dome_patch.mesh, a, b)
    with pytest.raises(PatchError):
        split_patch(dome_patch, g)


def test_dome_coverage_acceptable(dome_patch):
    assert coverage_gap(dome_patch) < 1.0
